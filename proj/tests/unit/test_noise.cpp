#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "ca43/errors.hpp"
#include "ca43/noise.hpp"

namespace {

using namespace ca43;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

NoiseModel noise_model(double b, double l, std::uint64_t seed = 3) {
  NoiseModel n;
  n.b_field_rms = b;
  n.laser_freq_rms = l;
  n.rng_seed = seed;
  return n;
}

TEST(Noise, LinewidthToRms) {
  // Gaussian FWHM = 2 sqrt(2 ln 2) sigma.
  EXPECT_NEAR(laser_rms_from_linewidth(20.0), 20.0 / 2.3548200450309493 * 1e-3, 1e-12);
  EXPECT_NEAR(laser_rms_from_linewidth(20.0, 2.0), 2.0 * laser_rms_from_linewidth(20.0), 1e-15);
}

TEST(Noise, OffsetsAreDeterministicAndOrderIndependent) {
  const auto n = noise_model(1e-4, 0.01);
  std::vector<ShotOffsets> forward;
  for (std::uint64_t s = 0; s < 50; ++s) forward.push_back(sample_shot_offsets(n, s));
  for (std::uint64_t s = 50; s-- > 0;) {
    const auto o = sample_shot_offsets(n, s);
    EXPECT_EQ(o.field, forward[s].field);
    EXPECT_EQ(o.laser, forward[s].laser);
  }
  EXPECT_NE(sample_shot_offsets(n, 1, 0).field, sample_shot_offsets(n, 1, 1).field);
  EXPECT_NE(sample_shot_offsets(noise_model(1e-4, 0.01, 4), 1).field, forward[1].field);
  EXPECT_EQ(stream_seed(1, 2, 3), stream_seed(1, 2, 3));
  EXPECT_NE(stream_seed(1, 2, 3), stream_seed(1, 3, 2));
  const auto quiet = sample_shot_offsets(noise_model(0.0, 0.0), 7);
  EXPECT_EQ(quiet.field, 0.0);
  EXPECT_EQ(quiet.laser, 0.0);
}

TEST(Noise, OffsetStatisticsMatchModel) {
  const auto n = noise_model(2e-4, 0.05);
  const int N = 40000;
  double sb = 0, sbb = 0, sl = 0, sll = 0, sbl = 0;
  for (int s = 0; s < N; ++s) {
    const auto o = sample_shot_offsets(n, s);
    sb += o.field;
    sbb += o.field * o.field;
    sl += o.laser;
    sll += o.laser * o.laser;
    sbl += o.field * o.laser;
  }
  EXPECT_LT(std::abs(sb / N), 4 * 2e-4 / std::sqrt(N));
  EXPECT_LT(std::abs(sl / N), 4 * 0.05 / std::sqrt(N));
  EXPECT_NEAR(std::sqrt(sbb / N), 2e-4, 0.02 * 2e-4);
  EXPECT_NEAR(std::sqrt(sll / N), 0.05, 0.02 * 0.05);
  EXPECT_LT(std::abs(sbl / N) / (2e-4 * 0.05), 4.0 / std::sqrt(N));
}

TEST(Noise, DephasingChannelMatchesGaussianAverage) {
  LevelCouplings c{{0.0, 20.0}, {0.0, 1.0}};  // kHz/G, laser frame flag
  const auto n = noise_model(1e-3, 0.01);
  const double t = 3.0;
  // Bell coherence |00><11|: phase 2 pi t (2 ds dB + 2 dl dnu).
  const double var = std::pow(kTwoPi * t, 2) * (std::pow(2 * 20.0 * 1e-3, 2) + std::pow(2 * 0.01, 2));
  Eigen::VectorXcd psi = Eigen::VectorXcd::Constant(4, 0.5);
  const auto in = JointState::from_vector(2, 1, psi);
  const auto out = apply_dephasing(in, t, n, c);
  EXPECT_NEAR(std::abs(out.rho()(0, 3)), 0.25 * std::exp(-0.5 * var), 1e-12);
  EXPECT_NEAR(std::abs(out.rho()(1, 2)), 0.25, 1e-12);  // |01><10| is collective-noise free
  const double single = std::pow(kTwoPi * t, 2) * (std::pow(20.0 * 1e-3, 2) + std::pow(0.01, 2));
  EXPECT_NEAR(std::abs(out.rho()(0, 1)), 0.25 * std::exp(-0.5 * single), 1e-12);
  for (int k = 0; k < 4; ++k) EXPECT_NEAR(out.rho()(k, k).real(), 0.25, 1e-15);
  EXPECT_NEAR(bell_dephasing_rate(n, c), std::sqrt(var) / t, 1e-12);
}

TEST(Noise, ShotPhasesAverageToTheChannel) {
  LevelCouplings c{{0.0, 20.0}, {0.0, 1.0}};
  const auto n = noise_model(1e-3, 0.01);
  const double t = 3.0;
  const int N = 20000;
  cplx sum = 0.0;
  for (int s = 0; s < N; ++s) {
    const auto ph = shot_phases(c, sample_shot_offsets(n, s), t);
    sum += ph(0) * std::conj(ph(3));
  }
  const double expected = std::exp(-0.5 * std::pow(bell_dephasing_rate(n, c) * t, 2));
  EXPECT_NEAR(std::abs(sum) / N, expected, 4.0 / std::sqrt(N));
  const auto mc = contrast_curve_mc(n, c, {t}, N);
  EXPECT_NEAR(mc[0], contrast_curve(n, c, {t})[0], 4.0 / std::sqrt(N));
}

TEST(Noise, HalfLifeOfAnalyticCurve) {
  LevelCouplings c{{0.0, 20.0}, {0.0, 1.0}};
  const auto n = noise_model(1e-3, 0.01);
  const double th = analytic_t_half(n, c);
  EXPECT_NEAR(contrast_curve(n, c, {th})[0], 0.5, 1e-12);
  EXPECT_TRUE(std::isinf(analytic_t_half(noise_model(0.0, 0.0), c)));
}

TEST(Noise, GaussianFitRecoversSyntheticDecay) {
  std::vector<DecaySample> data;
  for (double t = 0.0; t <= 10.0; t += 1.0) data.push_back({t, 0.95 * std::exp(-std::pow(t / 4.0, 2)), 0.01});
  const auto fit = fit_gaussian_decay(data);
  ASSERT_TRUE(fit.ok) << fit.diagnostics;
  ASSERT_TRUE(fit.identifiable);
  EXPECT_NEAR(fit.tau, 4.0, 1e-6);
  EXPECT_NEAR(fit.c0, 0.95, 1e-8);
  EXPECT_NEAR(fit.t_half, 4.0 * std::sqrt(std::log(2.0)), 1e-6);
  EXPECT_LT(fit.chi2, 1e-10);
}

TEST(Noise, GaussianFitScatterCoverage) {
  // Hand-rolled coverage check: the quoted tau sigma is honest within a factor.
  std::mt19937_64 rng(99);
  std::normal_distribution<double> g;
  int within = 0;
  const int trials = 200;
  for (int k = 0; k < trials; ++k) {
    std::vector<DecaySample> data;
    for (double t = 0.5; t <= 8.0; t += 0.5) data.push_back({t, 0.9 * std::exp(-std::pow(t / 4.0, 2)) + 0.02 * g(rng), 0.02});
    const auto fit = fit_gaussian_decay(data);
    ASSERT_TRUE(fit.ok);
    if (std::abs(fit.tau - 4.0) < fit.tau_sigma) ++within;
  }
  EXPECT_GT(within, trials * 0.55);
  EXPECT_LT(within, trials * 0.80);
}

TEST(Noise, GaussianFitReportsBadData) {
  EXPECT_FALSE(fit_gaussian_decay({}).ok);
  EXPECT_FALSE(fit_gaussian_decay({{0, 1, 0.1}, {1, 1, 0.1}}).ok);
  EXPECT_FALSE(fit_gaussian_decay({{0, 1, 0}, {1, 1, 0.1}, {2, 1, 0.1}}).ok);
  const auto flat = fit_gaussian_decay({{0, 0.9, 0.01}, {1, 0.9, 0.01}, {2, 0.9, 0.01}, {3, 0.9, 0.01}});
  EXPECT_FALSE(flat.identifiable);
  EXPECT_FALSE(flat.diagnostics.empty());
  EXPECT_TRUE(std::isinf(flat.tau));
}

TEST(Noise, CalibrationReproducesBothHalfLives) {
  const auto species = IonSpecies::ca43();
  const auto n = calibrate_noise(species, 6.0, 3.43, 96.0);
  EXPECT_NEAR(analytic_t_half(n, qubit_couplings(species, optical_qubit(), 6.0)), 3.43, 1e-9);
  EXPECT_NEAR(analytic_t_half(n, qubit_couplings(species, hyperfine_qubit(), 6.0)), 96.0, 1e-9);
  EXPECT_GT(n.laser_freq_rms, 0.0);
  EXPECT_THROW(calibrate_noise(species, 6.0, 500.0, 96.0), ConfigError);
  EXPECT_THROW(noise_model(-1.0, 0.0).validate(), ConfigError);
}

}  // namespace
