#include <gtest/gtest.h>

#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <random>

#include "ca43/detection.hpp"
#include "ca43/errors.hpp"

namespace {

using namespace ca43;

double log_pmf(double k, double mu) { return k * std::log(mu) - mu - std::lgamma(k + 1.0); }

TEST(Detection, PoissonCdfMatchesRegularizedGamma) {
  for (double mu : {0.3, 2.0, 10.0, 60.6, 120.6})
    for (long k : {0L, 1L, 3L, 10L, 30L, 90L, 130L})
      EXPECT_NEAR(poisson_cdf(k, mu), boost::math::gamma_q(static_cast<double>(k + 1), mu), 1e-12)
          << "k=" << k << " mu=" << mu;
  EXPECT_EQ(poisson_cdf(-1, 3.0), 0.0);
  EXPECT_EQ(poisson_cdf(0, 0.0), 1.0);
}

TEST(Detection, LogPoissonCutsEqualizeNeighbouringPmfs) {
  const auto m = DetectionModel::standard();
  const double mu0 = 0.6, mu1 = 60.6, mu2 = 120.6;
  EXPECT_NEAR(log_pmf(m.cut_low, mu0), log_pmf(m.cut_low, mu1), 1e-9);
  EXPECT_NEAR(log_pmf(m.cut_high, mu1), log_pmf(m.cut_high, mu2), 1e-9);
  EXPECT_LT(m.cut_low, m.cut_high);
  EXPECT_NO_THROW(m.validate());
  EXPECT_THROW(DetectionModel::log_poisson_cut(2.0, 1.0), ConfigError);
}

TEST(Detection, ClassificationBoundaries) {
  auto m = DetectionModel::standard();
  const long lo = static_cast<long>(std::floor(m.cut_low));
  const long hi = static_cast<long>(std::floor(m.cut_high));
  EXPECT_EQ(m.classify(0), 0);
  EXPECT_EQ(m.classify(lo), 0);
  EXPECT_EQ(m.classify(lo + 1), 1);
  EXPECT_EQ(m.classify(hi), 1);
  EXPECT_EQ(m.classify(hi + 1), 2);
  m.cut_high = m.cut_low;
  EXPECT_THROW(m.validate(), ConfigError);
  auto weak = DetectionModel::standard();
  weak.bright_rate = 1.0;
  EXPECT_THROW(weak.validate(), ConfigError);
}

TEST(Detection, SimulatedCountsFollowTheModel) {
  const auto m = DetectionModel::standard();
  std::mt19937_64 rng(8);
  const int N = 20000;
  double sum = 0.0;
  for (int k = 0; k < N; ++k) sum += simulate_detection(2, 0, m, rng).counts;
  const double mu = (m.dark_rate + 2 * m.bright_rate) * m.detect_duration;
  EXPECT_NEAR(sum / N, mu, 4.0 * std::sqrt(mu / N));
}

TEST(Detection, DecayMisclassificationAgreesWithMonteCarlo) {
  const auto m = DetectionModel::standard();
  std::mt19937_64 rng(21);
  const int N = 400000;
  int wrong = 0, decays = 0;
  for (int k = 0; k < N; ++k) {
    const auto o = simulate_detection(0, 1, m, rng);
    decays += o.decays;
    wrong += o.bright_ions != 0;
  }
  const double p_decay = 1.0 - std::exp(-m.detect_duration / (m.d_decay_lifetime * 1e3));
  EXPECT_NEAR(static_cast<double>(decays) / N, p_decay, 4.0 * std::sqrt(p_decay / N));
  const double exact = decay_misclassification(m) + poisson_misclassification(m, 0);
  EXPECT_NEAR(static_cast<double>(wrong) / N, exact, 4.0 * std::sqrt(exact / N));
}

TEST(Detection, DecayIntegralMatchesIncompleteGammaClosedForm) {
  // int_0^1 P(k, a + b s) ds = [G(a + b) - G(a)] / b, G(x) = x P(k, x) - k P(k + 1, x),
  // with P the regularized lower gamma and k = cut + 1.
  const auto m = DetectionModel::standard();
  const double t = m.detect_duration;
  const double a = m.dark_rate * t, b = m.bright_rate * t;
  const double k = std::floor(m.cut_low) + 1.0;
  auto G = [&](double x) { return x * boost::math::gamma_p(k, x) - k * boost::math::gamma_p(k + 1.0, x); };
  const double p_decay = 1.0 - std::exp(-t / (m.d_decay_lifetime * 1e3));
  EXPECT_NEAR(decay_misclassification(m), p_decay * (G(a + b) - G(a)) / b, 1e-9);
}

TEST(Detection, CheckRejection) {
  const auto m = DetectionModel::standard();
  const double mu = (m.dark_rate + m.bright_rate) * m.check_duration;
  EXPECT_NEAR(check_rejection_probability(m, 1), boost::math::gamma_p(m.check_threshold + 1.0, mu), 1e-12);
  std::mt19937_64 rng(4);
  const int N = 50000;
  int rej = 0;
  for (int k = 0; k < N; ++k) rej += check_rejects(1, m, rng);
  const double p = check_rejection_probability(m, 1);
  EXPECT_NEAR(static_cast<double>(rej) / N, p, 4.0 * std::sqrt(p * (1 - p) / N));
  EXPECT_LT(check_rejection_probability(m, 0), 1e-4);
}

TEST(Detection, PoissonOverlapIsSmallButNonzero) {
  const auto m = DetectionModel::standard();
  for (int b : {0, 1, 2}) {
    EXPECT_GT(poisson_misclassification(m, b), 0.0);
    EXPECT_LT(poisson_misclassification(m, b), 1e-2);
  }
  EXPECT_THROW(poisson_misclassification(m, 3), UsageError);
}

}  // namespace
