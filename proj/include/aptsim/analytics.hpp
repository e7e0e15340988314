#pragma once

// Closed-form time-domain predictions for evolution under H_APT.
//
// With A = -J sz + i G sx (so H_APT = A - i G I) we have A^2 = (J^2 - G^2) I
// and therefore
//   exp(-i H_APT t) = e^{-G t} [cos(w t) I - i sin(w t)/w A],  w^2 = J^2 - G^2.
// cos(w t) and sin(w t)/w are even in w and real for real w^2 of either sign,
// which is how both regimes and the exceptional point are handled without
// complex branches.

#include <cmath>
#include <limits>

#include "aptsim/errors.hpp"
#include "aptsim/linalg.hpp"
#include "aptsim/model.hpp"

namespace aptsim {

/// Sub-normalized 2x2 density matrix; rho10 = conj(rho01).
struct DensityMatrix2 {
  double rho00{0.0};
  double rho11{0.0};
  cplx rho01{};

  double trace() const { return rho00 + rho11; }

  ComplexMat2 matrix() const { return {rho00, rho01, std::conj(rho01), rho11}; }

  static DensityMatrix2 from_matrix(const ComplexMat2& m) {
    return {m(0, 0).real(), m(1, 1).real(), 0.5 * (m(0, 1) + std::conj(m(1, 0)))};
  }

  static DensityMatrix2 from_state(const QubitState& psi) {
    return {std::norm(psi.amp0), std::norm(psi.amp1), psi.amp0 * std::conj(psi.amp1)};
  }
};

/// e^{-G t} cos(w t) and e^{-G t} sin(w t)/w, evaluated without overflow or
/// cancellation in either regime.
struct DampedTrig {
  double cos_part{1.0};
  double sinc_part{0.0};
};

inline constexpr double kEpSeriesWindow = 1e-6;

inline DampedTrig damped_trig(const SystemParams& p, double tau) {
  const double w2 = p.omega_squared();
  const double x2 = w2 * tau * tau;  // (w tau)^2, negative when J < G
  const double decay = std::exp(-p.gamma * tau);

  if (std::abs(x2) <= kEpSeriesWindow * kEpSeriesWindow) {
    return {decay * (1.0 - x2 / 2.0 + x2 * x2 / 24.0),
            decay * tau * (1.0 - x2 / 6.0 + x2 * x2 / 120.0)};
  }
  if (w2 > 0.0) {
    const double w = std::sqrt(w2);
    return {decay * std::cos(w * tau), decay * std::sin(w * tau) / w};
  }
  const double kappa = std::sqrt(-w2);
  const double kt = kappa * tau;
  if (kt < 700.0 && p.gamma * tau < 700.0) {
    return {decay * std::cosh(kt), decay * std::sinh(kt) / kappa};
  }
  // kappa - G = -J^2 / (G + kappa) < 0: the growing branch is tamed by the decay.
  const double grow = std::exp(-p.j * p.j / (p.gamma + kappa) * tau);
  const double fall = std::exp(-(kappa + p.gamma) * tau);
  return {0.5 * (grow + fall), 0.5 * (grow - fall) / kappa};
}

/// exp(-i H_APT tau)|0> in closed form.
inline QubitState apt_state_from_ground(const SystemParams& p, double tau) {
  const auto [c, s] = damped_trig(p, tau);
  // -i s A |0> = -i s (-J|0> + iG|1>) = i J s |0> + G s |1>
  return {cplx{c, p.j * s}, cplx{p.gamma * s, 0.0}};
}

/// rho(tau) = U|0><0|U^dagger for U = exp(-i H_APT tau).
inline DensityMatrix2 rho_closed(const SystemParams& p, double tau) {
  if (!(tau >= 0.0)) throw InvalidParams("tau must be non-negative");
  return DensityMatrix2::from_state(apt_state_from_ground(p, tau));
}

/// |<psi'|exp(-i H_APT tau)|psi>|^2 with psi = (|0> - i|1>)/sqrt(2);
/// equals cos^2(w tau) e^{-2 G tau}.
inline double overlap_p(const SystemParams& p, double tau) {
  if (!(tau >= 0.0)) throw InvalidParams("tau must be non-negative");
  const double c = damped_trig(p, tau).cos_part;
  return c * c;
}

/// |1> population after pure dissipation from |1>.
inline double dissipation_decay(double gamma, double tau) {
  if (!(tau >= 0.0) || !(gamma >= 0.0)) throw InvalidParams("Gamma and tau must be non-negative");
  return std::exp(-4.0 * gamma * tau);
}

inline constexpr double kOverlapUnitSnap = 1e-13;

/// Recovers sqrt(J^2 - G^2) from a measured overlap P at time tau0.
///
/// q = sqrt(P e^{2 G tau0}) = |cos(w tau0)|. q <= 1 gives a real w
/// (broken regime) via arccos; q > 1 gives w = i*kappa via arccosh. Principal
/// branches are exact when w*tau0 < pi/2, which holds for tau0 = 1/J; other
/// choices of tau0 alias to the principal branch. |q - 1| <= unit_snap is
/// treated as the exceptional point, q = 1.
inline cplx invert_overlap(double overlap, double tau0, double gamma,
                           double unit_snap = kOverlapUnitSnap) {
  if (!(overlap > 0.0)) throw InvalidOverlap("overlap must be positive");
  if (!(tau0 > 0.0)) throw InvalidParams("tau0 must be positive");
  if (!(gamma >= 0.0)) throw InvalidParams("Gamma must be non-negative");
  const double q = std::sqrt(overlap * std::exp(2.0 * gamma * tau0));
  if (!std::isfinite(q)) throw InvalidOverlap("overlap inversion is not finite");
  if (std::abs(q - 1.0) <= unit_snap) return {0.0, 0.0};
  if (q <= 1.0) return {std::acos(q) / tau0, 0.0};
  return {0.0, std::acosh(q) / tau0};
}

}  // namespace aptsim
