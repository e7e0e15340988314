#pragma once

// Hamiltonians of the dissipative two-level system and their symmetries.
//
// Units: J and Gamma are angular rates in 1/us, times are in us. Gamma is the
// dissipation parameter; the population of |1> decays at rate 4*Gamma.

#include <algorithm>
#include <cmath>
#include <utility>

#include "aptsim/errors.hpp"
#include "aptsim/linalg.hpp"

namespace aptsim {

enum class Regime {
  kAptSymmetric,  // J < Gamma, purely imaginary spectrum
  kExceptional,   // J == Gamma within tol_ep
  kAptBroken,     // J > Gamma, eigenvalues acquire real parts
};

inline const char* to_string(Regime r) {
  switch (r) {
    case Regime::kAptSymmetric: return "apt_symmetric";
    case Regime::kExceptional: return "exceptional";
    case Regime::kAptBroken: return "apt_broken";
  }
  return "unknown";
}

inline constexpr double kDefaultEpTol = 1e-9;

struct SystemParams {
  double j{0.0};
  double gamma{0.0};

  static SystemParams make(double j, double gamma) {
    if (!(j >= 0.0) || !(gamma >= 0.0) || !std::isfinite(j) || !std::isfinite(gamma)) {
      throw InvalidParams("J and Gamma must be finite and non-negative");
    }
    return {j, gamma};
  }

  /// J^2 - Gamma^2, factored for accuracy near the exceptional point.
  double omega_squared() const { return (j - gamma) * (j + gamma); }

  /// sqrt(J^2 - Gamma^2) on the principal branch: real for J >= Gamma,
  /// i*sqrt(Gamma^2 - J^2) otherwise.
  cplx omega() const {
    const double w2 = omega_squared();
    return w2 >= 0.0 ? cplx{std::sqrt(w2), 0.0} : cplx{0.0, std::sqrt(-w2)};
  }

  Regime regime(double tol_ep = kDefaultEpTol) const {
    if (std::abs(j - gamma) <= tol_ep * std::max(j, gamma)) return Regime::kExceptional;
    return j < gamma ? Regime::kAptSymmetric : Regime::kAptBroken;
  }

  friend bool operator==(const SystemParams&, const SystemParams&) = default;
};

/// -2J*Iz + 2i*Gamma*Ix - i*Gamma*I.
inline ComplexMat2 h_apt(const SystemParams& p) {
  return {cplx{-p.j, -p.gamma}, cplx{0.0, p.gamma}, cplx{0.0, p.gamma}, cplx{p.j, -p.gamma}};
}

/// 2i*Gamma*Iz + 2J*Ix - i*Gamma*I: coupling J plus loss on |1>.
inline ComplexMat2 h_m(const SystemParams& p) {
  return {0.0, p.j, p.j, cplx{0.0, -2.0 * p.gamma}};
}

/// Parity P = 2*Ix together with the antilinear PT map on operators,
/// K(M) = P * conj(M) * P^-1.
struct SymmetryOps {
  ComplexMat2 parity = ComplexMat2::sigma_x();

  ComplexMat2 pt(const ComplexMat2& m) const { return parity * m.conj() * parity; }
};

/// ||K(H) + H||, zero iff H is anti-PT-symmetric.
inline double anticommutator_pt(const ComplexMat2& h, const SymmetryOps& ops = {}) {
  return (ops.pt(h) + h).norm();
}

/// ||K(H) - H||, zero iff H is PT-symmetric.
inline double commutator_pt(const ComplexMat2& h, const SymmetryOps& ops = {}) {
  return (ops.pt(h) - h).norm();
}

/// M - tr(M)/2 * I. For H_M this strips the uniform loss -i*Gamma*I and
/// leaves the PT-symmetric part.
inline ComplexMat2 traceless_part(const ComplexMat2& m) {
  return m - ComplexMat2::identity() * (0.5 * m.trace());
}

/// E+- = -i*Gamma +- sqrt(J^2 - Gamma^2).
inline std::pair<cplx, cplx> eigenvalues_apt_unnormalized(const SystemParams& p) {
  const cplx w = p.omega();
  const cplx centre{0.0, -p.gamma};
  return {centre + w, centre - w};
}

/// E+- / Gamma = -i +- sqrt(J^2 - Gamma^2) / Gamma.
inline std::pair<cplx, cplx> eigenvalues_apt(const SystemParams& p) {
  if (p.gamma == 0.0) {
    throw UndefinedNormalization("normalized eigenvalues undefined for Gamma = 0");
  }
  const cplx w = p.omega() / p.gamma;
  return {cplx{0.0, -1.0} + w, cplx{0.0, -1.0} - w};
}

}  // namespace aptsim
