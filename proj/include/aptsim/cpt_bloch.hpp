#pragma once

// CPT inner product and non-Hermitian Bloch-sphere coordinates for H_M.
//
// For r = Gamma/J < 1 the operator C = 2/sqrt(1 - r^2) (Ix + i r Iz) commutes
// with H_M and with the PT map, C^2 = I, and the metric P^T C^T is positive
// definite. The eigenstates eps+- of H_M (eps+ has eigenvalue -iG + w, w > 0)
// are orthonormal under <a|b>_CPT = a^dagger P^T C^T b, and any state expands
// as R cos(Theta/2) eps+ + R sin(Theta/2) e^{i Phi} eps-.
//
// For r > 1 the eigenstates of H_M are CPT-null, so the coordinates are not
// defined. An opt-in continuation Dirac-normalizes the eigenvectors and uses
// the biorthogonal expansion coefficients instead; points produced that way
// carry physical = false.

#include <cmath>
#include <numbers>
#include <vector>

#include "aptsim/errors.hpp"
#include "aptsim/linalg.hpp"
#include "aptsim/model.hpp"

namespace aptsim {

struct CptFrame {
  SystemParams params{};
  double r{0.0};
  ComplexMat2 c_op{};
  QubitState eps_plus{};
  QubitState eps_minus{};
  bool regime_valid{false};
};

/// Builds the frame for H_M(J, Gamma). Throws InvalidRegime when r >= 1
/// unless allow_continuation is set; r == 1 (coalescing eigenvectors) and
/// J == 0 are always rejected.
inline CptFrame make_cpt_frame(const SystemParams& p, bool allow_continuation = false) {
  if (!(p.j > 0.0)) throw InvalidRegime("CPT frame needs J > 0 (r = Gamma/J)");
  CptFrame f;
  f.params = p;
  f.r = p.gamma / p.j;
  f.regime_valid = f.r < 1.0;
  if (!f.regime_valid && !allow_continuation) {
    throw InvalidRegime("C = 2/sqrt(1 - r^2)(Ix + i r Iz) requires r = Gamma/J < 1");
  }
  if (std::abs(f.r - 1.0) <= kDefaultEpTol) {
    throw InvalidRegime("eigenstates of H_M coalesce at r = 1");
  }

  const cplx root = std::sqrt(cplx{1.0 - f.r * f.r, 0.0});
  f.c_op = (ComplexMat2::spin_x() + ComplexMat2::spin_z() * cplx{0.0, f.r}) * (2.0 / root);

  // (H_M + iG I)/J = [[ir, 1], [1, -ir]] has eigenvalues mu = +-sqrt(1 - r^2)
  // with eigenvectors (1, mu - ir).
  const cplx ir{0.0, f.r};
  const QubitState v_plus{1.0, root - ir};
  const QubitState v_minus{1.0, -root - ir};
  if (f.regime_valid) {
    const ComplexMat2 metric = ComplexMat2::sigma_x().transpose() * f.c_op.transpose();
    auto cpt_normalize = [&](const QubitState& v) {
      const double n = dot(v, metric * v).real();
      return v * cplx{1.0 / std::sqrt(n)};
    };
    f.eps_plus = cpt_normalize(v_plus);
    f.eps_minus = cpt_normalize(v_minus);
  } else {
    f.eps_plus = normalized(v_plus);
    f.eps_minus = normalized(v_minus);
  }
  return f;
}

/// <phi|psi>_CPT = phi^dagger P^T C^T psi.
inline cplx cpt_inner(const CptFrame& frame, const QubitState& phi, const QubitState& psi) {
  const ComplexMat2 metric = ComplexMat2::sigma_x().transpose() * frame.c_op.transpose();
  return dot(phi, metric * psi);
}

struct BlochPoint {
  double radius{0.0};
  double theta{0.0};  // [0, pi]
  double phi{0.0};    // [-pi, pi)
  bool physical{true};

  double x() const { return radius * std::sin(theta) * std::cos(phi); }
  double y() const { return radius * std::sin(theta) * std::sin(phi); }
  double z() const { return radius * std::cos(theta); }

  BlochPoint on_unit_sphere() const { return {1.0, theta, phi, physical}; }
};

inline double wrap_angle(double a) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double w = std::remainder(a, two_pi);  // [-pi, pi]
  if (w >= std::numbers::pi) w -= two_pi;
  return w;
}

namespace detail {

inline std::pair<cplx, cplx> expansion_coefficients(const CptFrame& f, const QubitState& psi) {
  if (f.regime_valid) return {cpt_inner(f, f.eps_plus, psi), cpt_inner(f, f.eps_minus, psi)};
  // Solve psi = c+ eps+ + c- eps- directly.
  const ComplexMat2 basis{f.eps_plus.amp0, f.eps_minus.amp0, f.eps_plus.amp1, f.eps_minus.amp1};
  const cplx det = basis.det();
  const cplx cp = (basis(1, 1) * psi.amp0 - basis(0, 1) * psi.amp1) / det;
  const cplx cm = (-basis(1, 0) * psi.amp0 + basis(0, 0) * psi.amp1) / det;
  return {cp, cm};
}

}  // namespace detail

inline BlochPoint to_bloch(const CptFrame& frame, const QubitState& psi) {
  if (psi.norm2() == 0.0) throw ZeroState("cannot place the zero vector on the sphere");
  const auto [cp, cm] = detail::expansion_coefficients(frame, psi);
  const double ap = std::abs(cp);
  const double am = std::abs(cm);

  BlochPoint pt;
  pt.physical = frame.regime_valid;
  pt.radius = std::hypot(ap, am);
  pt.theta = 2.0 * std::atan2(am, ap);
  const double pole_tol = 1e-14 * pt.radius;
  pt.phi = (ap <= pole_tol || am <= pole_tol) ? 0.0 : wrap_angle(std::arg(cm) - std::arg(cp));
  return pt;
}

/// Inverse of to_bloch with the global phase fixed so that c+ is real.
inline QubitState from_bloch(const CptFrame& frame, const BlochPoint& pt) {
  const cplx cp = pt.radius * std::cos(pt.theta / 2.0);
  const cplx cm = pt.radius * std::sin(pt.theta / 2.0) * std::polar(1.0, pt.phi);
  return frame.eps_plus * cp + frame.eps_minus * cm;
}

struct TrajectorySample {
  double t{0.0};
  BlochPoint raw{};
  BlochPoint normalized{};
};

/// Samples the evolution of psi0 under H_M at n_steps uniform times on
/// [0, tau_max].
inline std::vector<TrajectorySample> trajectory_hm(const SystemParams& p, const QubitState& psi0,
                                                   double tau_max, int n_steps,
                                                   bool allow_continuation = false) {
  if (n_steps < 2) throw InvalidParams("trajectory needs at least 2 samples");
  if (!(tau_max >= 0.0)) throw InvalidParams("tau_max must be non-negative");
  const CptFrame frame = make_cpt_frame(p, allow_continuation);
  const ComplexMat2 gen = h_m(p) * cplx{0.0, -1.0};

  std::vector<TrajectorySample> out;
  out.reserve(static_cast<std::size_t>(n_steps));
  for (int k = 0; k < n_steps; ++k) {
    const double t = tau_max * k / (n_steps - 1);
    const QubitState psi = expm_closed(gen * t) * psi0;
    const BlochPoint raw = to_bloch(frame, psi);
    out.push_back({t, raw, raw.on_unit_sphere()});
  }
  return out;
}

}  // namespace aptsim
