#include "aptsim/virtual_lab.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

namespace aptsim {
namespace {

ShotConfig shots(std::int64_t n, std::uint64_t seed) {
  ShotConfig c;
  c.n_shots = n;
  c.seed = seed;
  return c;
}

ShotConfig exact_config() {
  ShotConfig c;
  c.exact = true;
  return c;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// --- sampling --------------------------------------------------------------

TEST(SampleMeasurement, GroundStateZBasis) {
  const auto rec = sample_measurement(QubitState::ground(), Basis::kZ, shots(1000, 1));
  EXPECT_EQ(rec.n0, 1000);
  EXPECT_EQ(rec.n1, 0);
  EXPECT_EQ(rec.n_lost, 0);
}

TEST(SampleMeasurement, BasisChangesMapEigenstatesToZero) {
  const double s = 1.0 / std::sqrt(2.0);
  EXPECT_EQ(sample_measurement(QubitState{s, s}, Basis::kX, shots(500, 2)).n0, 500);
  EXPECT_EQ(sample_measurement(QubitState{s, -s}, Basis::kX, shots(500, 2)).n1, 500);
  EXPECT_EQ(sample_measurement(QubitState{s, cplx{0.0, s}}, Basis::kY, shots(500, 2)).n0, 500);
  EXPECT_EQ(sample_measurement(QubitState{s, cplx{0.0, -s}}, Basis::kY, shots(500, 2)).n1, 500);
}

TEST(SampleMeasurement, DissipatedPopulationLawOfLargeNumbers) {
  const double g = 0.05;
  const double tau = 7.0;
  const QubitState psi = segment_propagator(HoldDissipation{g, tau}) * QubitState::excited();
  const std::int64_t n = 1'000'000;
  const auto rec = sample_measurement(psi, Basis::kZ, shots(n, 3));
  const double p = std::exp(-4.0 * g * tau);
  const double sigma = std::sqrt(p * (1.0 - p) / n);
  EXPECT_LE(std::abs(static_cast<double>(rec.n1) / n - p), 3.0 * sigma);
  EXPECT_EQ(rec.n0, 0);
  EXPECT_EQ(rec.n0 + rec.n1 + rec.n_lost, n);
}

TEST(SampleMeasurement, DeterministicForFixedSeed) {
  const QubitState psi{0.6, cplx{0.0, 0.5}};
  for (Basis b : {Basis::kZ, Basis::kX, Basis::kY}) {
    const auto a = sample_measurement(psi, b, shots(4000, 77));
    const auto c = sample_measurement(psi, b, shots(4000, 77));
    EXPECT_EQ(a.n0, c.n0);
    EXPECT_EQ(a.n1, c.n1);
    EXPECT_EQ(a.n_lost, c.n_lost);
  }
}

TEST(SampleMeasurement, RejectsSupernormalizedState) {
  EXPECT_THROW(sample_measurement(QubitState{1.0, 0.01}, Basis::kZ, shots(10, 1)), InvalidState);
  EXPECT_NO_THROW(sample_measurement(QubitState{1.0 + 1e-10, 0.0}, Basis::kZ, shots(10, 1)));
  EXPECT_THROW(sample_measurement(QubitState::ground(), Basis::kZ, shots(0, 1)), InvalidParams);
}

TEST(SampleMeasurement, ReadoutErrorFlipsLabels) {
  ShotConfig c = shots(1000, 5);
  c.noise.p01 = 1.0;
  const auto rec = sample_measurement(QubitState::ground(), Basis::kZ, c);
  EXPECT_EQ(rec.n0, 0);
  EXPECT_EQ(rec.n1, 1000);
  c.noise.p01 = 1.5;
  EXPECT_THROW(sample_measurement(QubitState::ground(), Basis::kZ, c), InvalidParams);
}

TEST(SampleMeasurement, ExactModeReportsProbabilities) {
  const QubitState psi{0.6, cplx{0.0, 0.5}};
  const auto rec = sample_measurement(psi, Basis::kZ, exact_config());
  EXPECT_DOUBLE_EQ(rec.p0(), 0.36);
  EXPECT_DOUBLE_EQ(rec.p1(), 0.25);
  EXPECT_EQ(rec.n_shots(), 1000);
}

TEST(SampleMeasurement, EstimatorVarianceIsBinomial) {
  const SystemParams p{0.065, 0.022};
  const double tau = 15.0;
  const double truth = overlap_p(p, tau);
  const std::int64_t n = 1000;
  std::vector<double> est;
  for (std::uint64_t seed = 0; seed < 200; ++seed) est.push_back(measure_overlap_p(p, tau, shots(n, seed)));
  double mean = 0.0;
  for (double e : est) mean += e;
  mean /= est.size();
  double var = 0.0;
  for (double e : est) var += (e - mean) * (e - mean);
  var /= est.size() - 1;
  const double binomial = truth * (1.0 - truth) / n;
  EXPECT_GE(var / binomial, 1.0 / 1.5);
  EXPECT_LE(var / binomial, 1.5);
}

// --- calibration -----------------------------------------------------------

TEST(CalibrateGamma, NoiselessRoundTrip) {
  for (double g : {0.050, 0.022}) {
    Rng rng(1);
    const auto taus = uniform_grid(0.0, 2.0 / (4.0 * g), 10);
    const auto fit = calibrate_gamma(simulate_dissipation_data(g, taus, exact_config(), rng));
    EXPECT_NEAR(fit.value, g, 1e-9);
  }
}

TEST(CalibrateGamma, StandardErrorCoverage) {
  const double g = 0.05;
  const auto taus = uniform_grid(0.0, 2.0 / (4.0 * g), 10);
  int covered = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Rng rng(seed);
    const auto fit = calibrate_gamma(simulate_dissipation_data(g, taus, shots(1000, seed), rng));
    if (std::abs(fit.value - g) <= 3.0 * fit.std_error) ++covered;
  }
  EXPECT_GE(covered, 190);
}

TEST(CalibrateGamma, NeedsThreeDistinctTimes) {
  Rng rng(1);
  const std::vector<double> taus{1.0, 1.0, 2.0, 2.0};
  EXPECT_THROW(calibrate_gamma(simulate_dissipation_data(0.05, taus, exact_config(), rng)), InvalidParams);
}

TEST(CalibrateJ, NoiselessRoundTrip) {
  for (double j : {0.06, 0.065}) {
    Rng rng(1);
    const auto taus = uniform_grid(0.0, 100.0, 40);
    const auto fit = calibrate_j(simulate_rabi_data(j, taus, exact_config(), rng));
    EXPECT_NEAR(fit.value, j, 1e-9);
    EXPECT_FALSE(fit.alias_warning);
  }
}

TEST(CalibrateJ, ShotNoiseFit) {
  Rng rng(4);
  const auto taus = uniform_grid(0.0, 100.0, 40);
  const auto fit = calibrate_j(simulate_rabi_data(0.06, taus, shots(1000, 4), rng));
  EXPECT_NEAR(fit.value, 0.06, 5.0 * fit.std_error);
  EXPECT_LT(fit.std_error, 1e-3);
}

TEST(CalibrateJ, FlatDataWarns) {
  Rng rng(1);
  const auto taus = uniform_grid(0.0, 100.0, 20);
  const auto fit = calibrate_j(simulate_rabi_data(0.0, taus, exact_config(), rng));
  EXPECT_TRUE(fit.alias_warning);
  EXPECT_NEAR(fit.value, 0.0, 1e-12);
}

TEST(CalibrateJ, ShortWindowWarns) {
  Rng rng(1);
  const auto taus = uniform_grid(0.0, 20.0, 10);  // far less than one period at J = 0.06
  const auto fit = calibrate_j(simulate_rabi_data(0.06, taus, exact_config(), rng));
  EXPECT_TRUE(fit.alias_warning);
}

TEST(CalibrateJ, NeedsEightTimes) {
  Rng rng(1);
  const auto taus = uniform_grid(0.0, 100.0, 7);
  EXPECT_THROW(calibrate_j(simulate_rabi_data(0.06, taus, exact_config(), rng)), InvalidParams);
}

// --- overlap ---------------------------------------------------------------

TEST(MeasureOverlap, ExactMatchesClosedForm) {
  EXPECT_NEAR(measure_overlap_p({0.065, 0.022}, 0.0, exact_config()), 1.0, 1e-15);
  for (double tau : {1.0, 10.0, 40.0}) {
    EXPECT_NEAR(measure_overlap_p({0.065, 0.022}, tau, exact_config()), overlap_p({0.065, 0.022}, tau), 1e-14);
    EXPECT_NEAR(measure_overlap_p({0.05, 0.05}, tau, exact_config()), std::exp(-0.1 * tau), 1e-14);
  }
}

TEST(MeasureOverlap, MillionShotsWithinBinomialError) {
  const SystemParams p{0.065, 0.022};
  const std::int64_t n = 1'000'000;
  for (double tau : {5.0, 20.0, 35.0}) {
    const double truth = overlap_p(p, tau);
    const double sigma = std::sqrt(truth * (1.0 - truth) / n);
    EXPECT_LE(std::abs(measure_overlap_p(p, tau, shots(n, 11)) - truth), 3.0 * sigma);
  }
}

// --- protocol --------------------------------------------------------------

TEST(Protocol, NoiselessReproducesEigenvalues) {
  const double g = 0.050;
  std::vector<double> js;
  for (double ratio : {0.2, 0.5, 1.0, 1.5, 2.0}) js.push_back(ratio * g);
  const auto est = run_eigenvalue_protocol(g, js, exact_config(), 3);
  ASSERT_EQ(est.size(), js.size());
  for (const auto& e : est) {
    ASSERT_TRUE(e.valid);
    const auto truth = eigenvalues_apt({e.j, g});
    EXPECT_LE(std::abs(e.e_plus - truth.first), 1e-10) << "ratio " << e.ratio;
    EXPECT_LE(std::abs(e.e_minus - truth.second), 1e-10);
    EXPECT_EQ(e.e_plus + e.e_minus, (cplx{0.0, -2.0}));
    EXPECT_LE(e.std_real, 1e-12);
    if (e.ratio < 1.0) EXPECT_EQ(e.e_plus.real(), 0.0);
    if (e.ratio == 1.0) EXPECT_EQ(e.e_plus, (cplx{0.0, -1.0}));
    if (e.ratio > 1.0) {
      EXPECT_NEAR(e.e_plus.real(), std::sqrt(e.ratio * e.ratio - 1.0), 1e-10);
      EXPECT_NEAR(e.e_plus.imag(), -1.0, 1e-10);
    }
  }
}

TEST(Protocol, SeedsDerivedPerPoint) {
  ShotConfig c = shots(200, 0xABCDEF);
  const auto est = run_eigenvalue_protocol(0.05, {0.01, 0.05, 0.08}, c, 2);
  for (std::size_t k = 0; k < est.size(); ++k) EXPECT_EQ(est[k].seed, 0xABCDEFull ^ k);
  const auto again = run_eigenvalue_protocol(0.05, {0.01, 0.05, 0.08}, c, 2);
  for (std::size_t k = 0; k < est.size(); ++k) {
    EXPECT_EQ(est[k].e_plus, again[k].e_plus);
    EXPECT_EQ(est[k].std_real, again[k].std_real);
  }
}

TEST(Protocol, Guards) {
  EXPECT_THROW(run_eigenvalue_protocol(0.0, {0.1}, exact_config(), 1), UndefinedNormalization);
  EXPECT_THROW(run_eigenvalue_protocol(0.05, {0.0}, exact_config(), 1), InvalidParams);
  EXPECT_THROW(run_eigenvalue_protocol(0.05, {0.1}, exact_config(), 0), InvalidParams);
}

TEST(Protocol, ZeroOverlapIsRecordedAsMissing) {
  // Two shots at a tiny overlap almost always read zero |0> counts.
  const auto est = run_eigenvalue_protocol(0.05, {0.01}, shots(1, 3), 3);
  ASSERT_EQ(est.size(), 1u);
  EXPECT_EQ(est[0].n_valid + est[0].n_failed, 3);
  if (!est[0].valid) EXPECT_EQ(est[0].n_valid, 0);
}

TEST(Protocol, NoisyRunsTrackTruth) {
  const double g = 0.05;
  std::vector<double> js;
  for (int k = 2; k <= 20; ++k) {
    if (k >= 9 && k <= 11) continue;
    js.push_back(g * k / 10.0);
  }
  const auto est = run_eigenvalue_protocol(g, js, shots(1000, 7), 3);
  int outliers = 0;
  for (const auto& e : est) {
    ASSERT_TRUE(e.valid);
    const double err = std::abs(e.e_plus - eigenvalues_apt({e.j, g}).first);
    const double std = std::hypot(e.std_real, e.std_imag);
    EXPECT_LE(err, 0.3) << "ratio " << e.ratio;
    if (err > 3.0 * std) ++outliers;
    EXPECT_NEAR((e.e_plus + e.e_minus).imag(), -2.0, 1e-12);
  }
  // three repeats give a noisy standard deviation, so allow a few misses
  EXPECT_LE(outliers, 3);
}

// --- tomography ------------------------------------------------------------

TEST(Fidelity, Limits) {
  const ComplexMat2 a = outer(QubitState::ground(), QubitState::ground());
  const ComplexMat2 b = outer(QubitState::excited(), QubitState::excited());
  EXPECT_NEAR(state_fidelity(a, a), 1.0, 1e-15);
  EXPECT_NEAR(state_fidelity(a, b), 0.0, 1e-15);
  const ComplexMat2 mixed = ComplexMat2::identity() * 0.5;
  EXPECT_NEAR(state_fidelity(a * 0.3, mixed * 0.8), 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(state_fidelity(a * 0.3, mixed * 0.8), state_fidelity(a, mixed), 1e-15);
}

TEST(Tomography, ExactModeIsSelfConsistent) {
  for (double tau : {0.0, 3.0, 10.0, 25.0}) {
    for (const SystemParams p : {SystemParams{0.06, 0.4}, SystemParams{0.1, 0.05}, SystemParams{0.05, 0.05}}) {
      const auto t = tomography(p, tau, exact_config());
      EXPECT_NEAR(t.fidelity, 1.0, 1e-12);
      EXPECT_NEAR(t.estimated.rho00, t.theory.rho00, 1e-12);
      EXPECT_LE(std::abs(t.estimated.rho01 - t.theory.rho01), 1e-12);
    }
  }
}

TEST(Tomography, ShotNoiseFidelityAtOperatingPoint) {
  const SystemParams p{0.15 * 0.4, 0.4};
  std::vector<double> fid;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto t = tomography(p, 10.0, shots(10'000, seed));
    ASSERT_GE(t.fidelity, 0.0);
    ASSERT_LE(t.fidelity, 1.0);
    const auto m = t.estimated.matrix();
    ASSERT_GE(eig_hermitian(m).values[0], -1e-15);
    fid.push_back(t.fidelity);
  }
  EXPECT_GE(median(fid), 0.99);
}

TEST(Tomography, ProjectsToPsd) {
  const ComplexMat2 bad{0.5, 0.6, 0.6, 0.5};  // eigenvalues -0.1 and 1.1
  const ComplexMat2 fixed = project_psd(bad);
  EXPECT_GE(eig_hermitian(fixed).values[0], -1e-15);
  EXPECT_NEAR(eig_hermitian(fixed).values[1], 1.1, 1e-14);
}

TEST(Tomography, DegenerateTraceWhenEverythingIsLost) {
  EXPECT_THROW(tomography({1.0, 5.0}, 200.0, exact_config()), DegenerateTrace);
}

TEST(Tomography, Deterministic) {
  const auto a = tomography({0.06, 0.4}, 10.0, shots(2000, 42));
  const auto b = tomography({0.06, 0.4}, 10.0, shots(2000, 42));
  EXPECT_EQ(a.fidelity, b.fidelity);
  EXPECT_EQ(a.estimated.rho01, b.estimated.rho01);
}

TEST(Noise, JitterChangesOutcomesButKeepsDeterminism) {
  ShotConfig c = shots(5000, 9);
  c.noise.gamma_jitter_rel = 0.1;
  c.noise.angle_jitter_rad = 0.05;
  const double a = measure_overlap_p({0.065, 0.022}, 20.0, c);
  const double b = measure_overlap_p({0.065, 0.022}, 20.0, c);
  EXPECT_EQ(a, b);
  const double clean = measure_overlap_p({0.065, 0.022}, 20.0, shots(5000, 9));
  EXPECT_NE(a, clean);
  c.noise.angle_jitter_rad = -1.0;
  EXPECT_THROW(measure_overlap_p({0.065, 0.022}, 20.0, c), InvalidParams);
}

}  // namespace
}  // namespace aptsim
