#pragma once

// Simulated experiment: shot sampling, calibration fits, the overlap-based
// eigenvalue protocol and state tomography.
//
// Measurement model: each shot ends in |0>, |1> or "lost" (population that
// left the qubit manifold), drawn from a trinomial with p0 = |a0|^2,
// p1 = |a1|^2, p_lost = 1 - p0 - p1.
//
// Basis changes before a Z readout:
//   Z  none
//   X  Ry(-pi/2)   maps |+>  to |0>
//   Y  Rx(+pi/2)   maps |+i> to |0>
//
// Seeds: sweep point k draws from an mt19937_64 seeded with base_seed ^ k.

#include <algorithm>
#include <cmath>
#include <array>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "aptsim/analytics.hpp"
#include "aptsim/errors.hpp"
#include "aptsim/fit.hpp"
#include "aptsim/linalg.hpp"
#include "aptsim/model.hpp"
#include "aptsim/pulse.hpp"

namespace aptsim {

using Rng = std::mt19937_64;

enum class Basis { kZ, kX, kY };

inline const char* to_string(Basis b) {
  switch (b) {
    case Basis::kZ: return "Z";
    case Basis::kX: return "X";
    case Basis::kY: return "Y";
  }
  return "?";
}

/// Gaussian jitter is resampled for every simulated run: multiplicative on
/// Gamma, additive on rotation angles. Readout flips 0->1 with p01 and
/// 1->0 with p10. All zero means ideal.
struct NoiseModel {
  double gamma_jitter_rel{0.0};
  double angle_jitter_rad{0.0};
  double p01{0.0};
  double p10{0.0};

  bool is_ideal() const {
    return gamma_jitter_rel == 0.0 && angle_jitter_rad == 0.0 && p01 == 0.0 && p10 == 0.0;
  }

  void validate() const {
    if (!(gamma_jitter_rel >= 0.0) || !(angle_jitter_rad >= 0.0)) {
      throw InvalidParams("noise standard deviations must be non-negative");
    }
    if (!(p01 >= 0.0 && p01 <= 1.0) || !(p10 >= 0.0 && p10 <= 1.0)) {
      throw InvalidParams("readout error probabilities must lie in [0, 1]");
    }
  }
};

struct ShotConfig {
  std::int64_t n_shots{1000};
  std::uint64_t seed{0};
  NoiseModel noise{};
  /// Report exact outcome probabilities instead of sampling (infinite shots).
  bool exact{false};

  void validate() const {
    if (n_shots < 1) throw InvalidParams("n_shots must be >= 1");
    noise.validate();
  }
};

struct MeasurementRecord {
  Basis basis{Basis::kZ};
  std::int64_t n0{0};
  std::int64_t n1{0};
  std::int64_t n_lost{0};
  double tau{0.0};
  SystemParams params_nominal{};
  /// Set in exact mode; overrides the count ratios.
  std::optional<std::array<double, 3>> probabilities{};

  std::int64_t n_shots() const { return n0 + n1 + n_lost; }
  double p0() const {
    return probabilities ? (*probabilities)[0] : static_cast<double>(n0) / n_shots();
  }
  double p1() const {
    return probabilities ? (*probabilities)[1] : static_cast<double>(n1) / n_shots();
  }
};

// ---------------------------------------------------------------------------
// Noise injection

namespace detail {

inline double jittered_gamma(double gamma, const NoiseModel& noise, Rng& rng) {
  if (noise.gamma_jitter_rel == 0.0) return gamma;
  std::normal_distribution<double> n(0.0, noise.gamma_jitter_rel);
  return std::max(0.0, gamma * (1.0 + n(rng)));
}

inline double jittered_angle(double angle, const NoiseModel& noise, Rng& rng) {
  if (noise.angle_jitter_rad == 0.0) return angle;
  std::normal_distribution<double> n(0.0, noise.angle_jitter_rad);
  return angle + n(rng);
}

inline PulseSegment perturb(const PulseSegment& seg, const NoiseModel& noise, Rng& rng) {
  if (const auto* r = std::get_if<Rotation>(&seg)) {
    return Rotation{r->axis, jittered_angle(r->angle, noise, rng)};
  }
  if (const auto* h = std::get_if<HoldHm>(&seg)) {
    return HoldHm{SystemParams{h->params.j, jittered_gamma(h->params.gamma, noise, rng)},
                  h->duration};
  }
  if (const auto* d = std::get_if<HoldDissipation>(&seg)) {
    return HoldDissipation{jittered_gamma(d->gamma, noise, rng), d->duration};
  }
  return seg;
}

inline PulseSequence perturb(const PulseSequence& seq, const NoiseModel& noise, Rng& rng) {
  if (noise.gamma_jitter_rel == 0.0 && noise.angle_jitter_rad == 0.0) return seq;
  std::vector<PulseSegment> segs;
  segs.reserve(seq.size());
  for (const auto& s : seq.segments()) segs.push_back(perturb(s, noise, rng));
  return PulseSequence(std::move(segs));
}

inline PulseSequence basis_change(Basis b) {
  constexpr double half_pi = std::numbers::pi / 2.0;
  switch (b) {
    case Basis::kZ: return {};
    case Basis::kX: return PulseSequence({Rotation{Axis::kY, -half_pi}});
    case Basis::kY: return PulseSequence({Rotation{Axis::kX, half_pi}});
  }
  return {};
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Sampling

/// Rotates psi into `basis` and draws cfg.n_shots trinomial outcomes.
inline MeasurementRecord sample_measurement(const QubitState& psi, Basis basis,
                                            const ShotConfig& cfg, Rng& rng) {
  cfg.validate();
  if (psi.norm2() > 1.0 + 1e-6) throw InvalidState("state norm exceeds 1");

  const PulseSequence change = detail::perturb(detail::basis_change(basis), cfg.noise, rng);
  const QubitState rotated = evolve(change, psi);

  double p0 = std::norm(rotated.amp0);
  double p1 = std::norm(rotated.amp1);
  if (p0 + p1 > 1.0) {
    const double s = p0 + p1;
    p0 /= s;
    p1 /= s;
  }
  const double p_lost = std::max(0.0, 1.0 - p0 - p1);

  MeasurementRecord rec;
  rec.basis = basis;
  const std::int64_t n = cfg.n_shots;

  if (cfg.exact) {
    const double q0 = p0 * (1.0 - cfg.noise.p01) + p1 * cfg.noise.p10;
    const double q1 = p1 * (1.0 - cfg.noise.p10) + p0 * cfg.noise.p01;
    rec.probabilities = std::array<double, 3>{q0, q1, p_lost};
    rec.n0 = std::llround(q0 * n);
    rec.n1 = std::min<std::int64_t>(std::llround(q1 * n), n - rec.n0);
    rec.n_lost = n - rec.n0 - rec.n1;
    return rec;
  }

  std::binomial_distribution<std::int64_t> draw0(n, std::clamp(p0, 0.0, 1.0));
  const std::int64_t n0 = draw0(rng);
  const double p1_cond = p0 < 1.0 ? std::clamp(p1 / (1.0 - p0), 0.0, 1.0) : 0.0;
  std::binomial_distribution<std::int64_t> draw1(n - n0, p1_cond);
  const std::int64_t n1 = draw1(rng);

  std::int64_t flip01 = 0;
  std::int64_t flip10 = 0;
  if (cfg.noise.p01 > 0.0) flip01 = std::binomial_distribution<std::int64_t>(n0, cfg.noise.p01)(rng);
  if (cfg.noise.p10 > 0.0) flip10 = std::binomial_distribution<std::int64_t>(n1, cfg.noise.p10)(rng);

  rec.n0 = n0 - flip01 + flip10;
  rec.n1 = n1 - flip10 + flip01;
  rec.n_lost = n - n0 - n1;
  return rec;
}

inline MeasurementRecord sample_measurement(const QubitState& psi, Basis basis,
                                            const ShotConfig& cfg) {
  Rng rng(cfg.seed);
  return sample_measurement(psi, basis, cfg, rng);
}

/// Runs `seq` from `psi0` with noise injected and samples the result.
inline MeasurementRecord run_and_measure(const PulseSequence& seq, const QubitState& psi0,
                                         Basis basis, const ShotConfig& cfg, Rng& rng) {
  const PulseSequence noisy = detail::perturb(seq, cfg.noise, rng);
  return sample_measurement(evolve(noisy, psi0), basis, cfg, rng);
}

// ---------------------------------------------------------------------------
// Calibration

/// Pure-dissipation runs from |1> at the given times.
inline std::vector<MeasurementRecord> simulate_dissipation_data(double gamma,
                                                                std::span<const double> taus,
                                                                const ShotConfig& cfg, Rng& rng) {
  std::vector<MeasurementRecord> out;
  out.reserve(taus.size());
  for (double tau : taus) {
    auto rec = run_and_measure(PulseSequence({HoldDissipation{gamma, tau}}),
                               QubitState::excited(), Basis::kZ, cfg, rng);
    rec.tau = tau;
    rec.params_nominal = SystemParams{0.0, gamma};
    out.push_back(rec);
  }
  return out;
}

/// Resonant Rabi drive from |0> at the given times.
inline std::vector<MeasurementRecord> simulate_rabi_data(double j, std::span<const double> taus,
                                                         const ShotConfig& cfg, Rng& rng) {
  std::vector<MeasurementRecord> out;
  out.reserve(taus.size());
  for (double tau : taus) {
    auto rec = run_and_measure(PulseSequence({HoldRabi{j, tau}}), QubitState::ground(),
                               Basis::kZ, cfg, rng);
    rec.tau = tau;
    rec.params_nominal = SystemParams{j, 0.0};
    out.push_back(rec);
  }
  return out;
}

inline std::vector<double> uniform_grid(double lo, double hi, int n) {
  std::vector<double> xs(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) xs[static_cast<std::size_t>(k)] = n == 1 ? lo : lo + (hi - lo) * k / (n - 1);
  return xs;
}

namespace detail {

inline void require_distinct_times(const std::vector<MeasurementRecord>& records,
                                   std::size_t minimum) {
  std::set<double> taus;
  for (const auto& r : records) taus.insert(r.tau);
  if (taus.size() < minimum) {
    throw InvalidParams("calibration needs at least " + std::to_string(minimum) +
                        " distinct times");
  }
}

}  // namespace detail

/// Fits p1(tau) = exp(-4 Gamma tau) to pure-dissipation data started in |1>.
inline FitResult calibrate_gamma(const std::vector<MeasurementRecord>& records) {
  detail::require_distinct_times(records, 3);
  std::vector<double> xs, ys;
  for (const auto& r : records) {
    xs.push_back(r.tau);
    ys.push_back(r.p1());
  }

  // log-linear start: ln p1 = -4 Gamma tau through the origin
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (ys[i] > 0.0) {
      num += xs[i] * std::log(ys[i]);
      den += xs[i] * xs[i];
    }
  }
  double gamma0 = den > 0.0 ? -num / (4.0 * den) : 0.0;
  if (!(gamma0 > 0.0)) gamma0 = 1e-6;

  const ScalarModel f = [](double t, double g) { return std::exp(-4.0 * g * t); };
  const ScalarModel df = [](double t, double g) { return -4.0 * t * std::exp(-4.0 * g * t); };
  return gauss_newton_1d(xs, ys, f, df, gamma0);
}

/// Fits p1(tau) = sin^2(J tau) to Rabi data. A coarse grid of resolution
/// pi/(4 tau_max) seeds the refinement; alias_warning is raised when the grid
/// has two near-equal minima or the data cover less than one Rabi period at
/// the fitted J.
inline FitResult calibrate_j(const std::vector<MeasurementRecord>& records) {
  detail::require_distinct_times(records, 8);
  std::vector<double> xs, ys;
  for (const auto& r : records) {
    xs.push_back(r.tau);
    ys.push_back(r.p1());
  }
  std::vector<double> sorted = xs;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  double dt_min = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < sorted.size(); ++i) dt_min = std::min(dt_min, sorted[i] - sorted[i - 1]);
  const double tau_max = sorted.back();
  const double span = sorted.back() - sorted.front();

  const ScalarModel f = [](double t, double j) {
    const double s = std::sin(j * t);
    return s * s;
  };
  const ScalarModel df = [](double t, double j) { return t * std::sin(2.0 * j * t); };

  // sin^2(J t) oscillates at 2J, so J < pi/(2 dt_min) avoids sampling aliases.
  const double resolution = std::numbers::pi / (4.0 * tau_max);
  const double j_hi = std::numbers::pi / (2.0 * dt_min);
  std::vector<double> grid;
  for (double j = 0.0; j < j_hi; j += resolution) grid.push_back(j);
  std::vector<double> sse(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    sse[i] = detail::sum_squared_residuals(xs, ys, f, grid[i]);
  }

  std::vector<std::size_t> minima;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const bool left = i == 0 || sse[i] <= sse[i - 1];
    const bool right = i + 1 == grid.size() || sse[i] <= sse[i + 1];
    if (left && right) minima.push_back(i);
  }
  std::sort(minima.begin(), minima.end(), [&](auto a, auto b) { return sse[a] < sse[b]; });
  const std::size_t best = minima.front();
  bool alias = false;
  if (minima.size() > 1) {
    const double s1 = sse[minima[0]];
    const double s2 = sse[minima[1]];
    alias = s2 - s1 <= 0.01 * s2;
  }

  FitResult fit;
  if (grid[best] == 0.0 && sse[best] <= 1e-28 * static_cast<double>(xs.size())) {
    fit.value = 0.0;
    fit.sse = sse[best];
    fit.std_error = std::numeric_limits<double>::infinity();
  } else {
    fit = gauss_newton_1d(xs, ys, f, df, grid[best]);
    fit.value = std::abs(fit.value);
  }
  fit.alias_warning = alias || fit.value * span < std::numbers::pi;
  return fit;
}

// ---------------------------------------------------------------------------
// Overlap measurement and the eigenvalue protocol

/// Rx(pi/2), exp(-i H_APT tau) via the y-sandwich, Rx(-pi/2), then the |0>
/// population. Its exact expectation is overlap_p(params, tau).
inline PulseSequence overlap_sequence(const SystemParams& params, double tau) {
  constexpr double half_pi = std::numbers::pi / 2.0;
  return PulseSequence({Rotation{Axis::kX, half_pi}})
      .then(compile_apt_evolution(params, tau))
      .then(Rotation{Axis::kX, -half_pi});
}

inline double measure_overlap_p(const SystemParams& params, double tau, const ShotConfig& cfg,
                                Rng& rng) {
  return run_and_measure(overlap_sequence(params, tau), QubitState::ground(), Basis::kZ, cfg, rng)
      .p0();
}

inline double measure_overlap_p(const SystemParams& params, double tau, const ShotConfig& cfg) {
  Rng rng(cfg.seed);
  return measure_overlap_p(params, tau, cfg, rng);
}

struct EigenvalueEstimate {
  double ratio{0.0};  // J / Gamma_nominal
  double j{0.0};
  double tau0{0.0};
  bool valid{false};
  cplx e_plus{};
  cplx e_minus{};
  double std_real{0.0};  // sample std of Re E+ over repeats (E- = -2i - E+)
  double std_imag{0.0};
  int n_valid{0};
  int n_failed{0};
  std::uint64_t seed{0};
};

struct ProtocolOptions {
  int calibration_points = 10;
  /// Calibration times span [0, span_factor / (4 Gamma)].
  double calibration_span = 2.0;
};

/// One pass of the overlap protocol at coupling j. Returns E+ / Gamma_cal.
inline cplx protocol_single_run(double gamma_nominal, double j, const ShotConfig& cfg,
                                const ProtocolOptions& opt, Rng& rng) {
  const auto taus = uniform_grid(0.0, opt.calibration_span / (4.0 * gamma_nominal),
                                 opt.calibration_points);
  const double gamma_cal = calibrate_gamma(simulate_dissipation_data(gamma_nominal, taus, cfg, rng)).value;
  if (!(gamma_cal > 0.0)) throw FitDiverged("calibrated Gamma is not positive");
  const double tau0 = 1.0 / j;
  const double p = measure_overlap_p(SystemParams{j, gamma_nominal}, tau0, cfg, rng);
  const cplx omega = invert_overlap(p, tau0, gamma_cal);
  return cplx{0.0, -1.0} + omega / gamma_cal;
}

/// For each J: recalibrate Gamma, measure P at tau0 = 1/J, invert for
/// sqrt(J^2 - Gamma^2), form E+- / Gamma; repeat n_repeats times and report
/// mean and sample standard deviation. Failed repeats are counted, not
/// replaced; a point with no successful repeat has valid = false.
inline std::vector<EigenvalueEstimate> run_eigenvalue_protocol(double gamma_nominal,
                                                               const std::vector<double>& j_list,
                                                               const ShotConfig& cfg, int n_repeats,
                                                               const ProtocolOptions& opt = {}) {
  if (!(gamma_nominal > 0.0)) throw UndefinedNormalization("normalized eigenvalues undefined for Gamma = 0");
  if (n_repeats < 1) throw InvalidParams("n_repeats must be >= 1");
  for (double j : j_list) {
    if (!(j > 0.0)) throw InvalidParams("every J must be positive");
  }
  cfg.validate();

  std::vector<EigenvalueEstimate> out;
  out.reserve(j_list.size());
  for (std::size_t k = 0; k < j_list.size(); ++k) {
    EigenvalueEstimate est;
    est.j = j_list[k];
    est.ratio = j_list[k] / gamma_nominal;
    est.tau0 = 1.0 / j_list[k];
    est.seed = cfg.seed ^ static_cast<std::uint64_t>(k);
    Rng rng(est.seed);

    std::vector<cplx> runs;
    for (int r = 0; r < n_repeats; ++r) {
      try {
        runs.push_back(protocol_single_run(gamma_nominal, j_list[k], cfg, opt, rng));
      } catch (const InvalidOverlap&) {
        ++est.n_failed;
      } catch (const FitDiverged&) {
        ++est.n_failed;
      }
    }
    est.n_valid = static_cast<int>(runs.size());
    est.valid = !runs.empty();
    if (est.valid) {
      cplx mean{};
      for (const auto& e : runs) mean += e;
      mean /= static_cast<double>(runs.size());
      double vr = 0.0;
      double vi = 0.0;
      for (const auto& e : runs) {
        vr += (e.real() - mean.real()) * (e.real() - mean.real());
        vi += (e.imag() - mean.imag()) * (e.imag() - mean.imag());
      }
      if (runs.size() > 1) {
        vr /= static_cast<double>(runs.size() - 1);
        vi /= static_cast<double>(runs.size() - 1);
      }
      est.e_plus = mean;
      est.e_minus = cplx{0.0, -2.0} - mean;
      est.std_real = std::sqrt(vr);
      est.std_imag = std::sqrt(vi);
    }
    out.push_back(est);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Tomography

/// |Tr(a b)| / sqrt(Tr(a^2) Tr(b^2)) after normalizing both to unit trace.
inline double state_fidelity(const ComplexMat2& rho_a, const ComplexMat2& rho_b) {
  const ComplexMat2 a = rho_a * (1.0 / rho_a.trace().real());
  const ComplexMat2 b = rho_b * (1.0 / rho_b.trace().real());
  const double num = std::abs((a * b).trace());
  const double den = std::sqrt((a * a).trace().real() * (b * b).trace().real());
  return std::clamp(num / den, 0.0, 1.0);
}

/// Nearest positive semidefinite matrix by clipping negative eigenvalues.
inline ComplexMat2 project_psd(const ComplexMat2& rho) {
  const auto eig = eig_hermitian(rho);
  ComplexMat2 out;
  for (std::size_t i = 0; i < 2; ++i) {
    const double lambda = std::max(eig.values[i], 0.0);
    out += outer(eig.vectors[i], eig.vectors[i]) * lambda;
  }
  return out;
}

struct TomographyResult {
  DensityMatrix2 estimated{};
  DensityMatrix2 theory{};
  double fidelity{0.0};
  std::array<MeasurementRecord, 3> records{};  // Z, X, Y
  bool projected{false};
};

/// Reconstructs the sub-normalized state after exp(-i H_APT tau)|0> from Z, X
/// and Y readouts (each from a fresh run) and compares it with rho_closed.
inline TomographyResult tomography(const SystemParams& params, double tau, const ShotConfig& cfg,
                                   Rng& rng) {
  if (!(tau >= 0.0)) throw InvalidParams("tau must be non-negative");
  cfg.validate();
  const PulseSequence seq = compile_apt_evolution(params, tau);

  TomographyResult out;
  const std::array<Basis, 3> bases{Basis::kZ, Basis::kX, Basis::kY};
  for (std::size_t i = 0; i < 3; ++i) {
    out.records[i] = run_and_measure(seq, QubitState::ground(), bases[i], cfg, rng);
    out.records[i].tau = tau;
    out.records[i].params_nominal = params;
  }
  const auto& z = out.records[0];
  const auto& x = out.records[1];
  const auto& y = out.records[2];
  const double ex = x.p0() - x.p1();
  const double ey = y.p0() - y.p1();

  const DensityMatrix2 raw{z.p0(), z.p1(), cplx{0.5 * ex, -0.5 * ey}};
  const ComplexMat2 raw_m = raw.matrix();
  const auto eig = eig_hermitian(raw_m);
  out.projected = eig.values[0] < 0.0;
  out.estimated = out.projected ? DensityMatrix2::from_matrix(project_psd(raw_m)) : raw;

  if (out.estimated.trace() <= 1e-6) {
    throw DegenerateTrace("reconstructed state has no population left");
  }
  out.theory = rho_closed(params, tau);
  out.fidelity = state_fidelity(out.theory.matrix(), out.estimated.matrix());
  return out;
}

inline TomographyResult tomography(const SystemParams& params, double tau, const ShotConfig& cfg) {
  Rng rng(cfg.seed);
  return tomography(params, tau, cfg, rng);
}

}  // namespace aptsim
