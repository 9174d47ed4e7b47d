#include "ca43/detection.hpp"

#include <cmath>

#include "ca43/errors.hpp"

namespace ca43 {

DetectionModel DetectionModel::standard() {
  DetectionModel m;
  m.set_default_cuts();
  return m;
}

double DetectionModel::log_poisson_cut(double mu_a, double mu_b) {
  if (!(mu_a > 0.0 && mu_b > mu_a)) throw ConfigError("log-Poisson cut needs 0 < mu_a < mu_b");
  return (mu_b - mu_a) / std::log(mu_b / mu_a);
}

void DetectionModel::set_default_cuts() {
  const double mu0 = dark_rate * detect_duration;
  const double mu1 = mu0 + bright_rate * detect_duration;
  const double mu2 = mu0 + 2.0 * bright_rate * detect_duration;
  cut_low = log_poisson_cut(mu0, mu1);
  cut_high = log_poisson_cut(mu1, mu2);
}

void DetectionModel::validate() const {
  if (!(dark_rate > 0.0) || !(bright_rate >= 10.0 * dark_rate))
    throw ConfigError("bright_rate must be at least 10x the (positive) dark_rate");
  if (!(detect_duration > 0.0) || !(check_duration >= 0.0)) throw ConfigError("detection durations must be positive");
  if (!(d_decay_lifetime > 0.0)) throw ConfigError("D lifetime must be positive");
  if (check_threshold < 0) throw ConfigError("check threshold must be >= 0");
  if (!(cut_low >= 0.0 && cut_high > cut_low)) throw ConfigError("classification thresholds must be increasing");
}

int DetectionModel::classify(long counts) const {
  if (counts <= cut_low) return 0;
  if (counts <= cut_high) return 1;
  return 2;
}

DetectionOutcome simulate_detection(int bright, int dark, const DetectionModel& model, std::mt19937_64& rng) {
  const double t = model.detect_duration;
  const double p_decay = 1.0 - std::exp(-t / (model.d_decay_lifetime * 1e3));
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  DetectionOutcome out;
  double mean = model.dark_rate * t + bright * model.bright_rate * t;
  for (int k = 0; k < dark; ++k) {
    if (uniform(rng) < p_decay) {
      ++out.decays;
      mean += model.bright_rate * t * (1.0 - uniform(rng));
    }
  }
  std::poisson_distribution<long> poisson(mean);
  out.counts = poisson(rng);
  out.bright_ions = model.classify(out.counts);
  return out;
}

bool check_rejects(int bright, const DetectionModel& model, std::mt19937_64& rng) {
  const double mean = (model.dark_rate + bright * model.bright_rate) * model.check_duration;
  if (mean == 0.0) return false;
  std::poisson_distribution<long> poisson(mean);
  return poisson(rng) > model.check_threshold;
}

double poisson_cdf(long k, double mean) {
  if (k < 0) return 0.0;
  if (mean == 0.0) return 1.0;
  // Sum in log space to stay accurate for large means.
  double term = std::exp(-mean);
  double sum = term;
  for (long j = 1; j <= k; ++j) {
    term *= mean / j;
    sum += term;
  }
  return std::min(1.0, sum);
}

double decay_misclassification(const DetectionModel& model, int other_bright) {
  const double t = model.detect_duration;
  const double p_decay = 1.0 - std::exp(-t / (model.d_decay_lifetime * 1e3));
  const double base = model.dark_rate * t + other_bright * model.bright_rate * t;
  const long cut = static_cast<long>(std::floor(other_bright == 0 ? model.cut_low : model.cut_high));
  // Uniform epoch: average over remaining fraction u in [0,1] with Simpson's rule.
  const int n = 2000;
  double acc = 0.0;
  for (int j = 0; j <= n; ++j) {
    const double u = static_cast<double>(j) / n;
    const double w = (j == 0 || j == n) ? 1.0 : (j % 2 ? 4.0 : 2.0);
    acc += w * (1.0 - poisson_cdf(cut, base + model.bright_rate * t * u));
  }
  return p_decay * acc / (3.0 * n);
}

double poisson_misclassification(const DetectionModel& model, int bright) {
  const double mean = (model.dark_rate + bright * model.bright_rate) * model.detect_duration;
  const long lo = static_cast<long>(std::floor(model.cut_low));
  const long hi = static_cast<long>(std::floor(model.cut_high));
  switch (bright) {
    case 0: return 1.0 - poisson_cdf(lo, mean);
    case 1: return poisson_cdf(lo, mean) + (1.0 - poisson_cdf(hi, mean));
    case 2: return poisson_cdf(hi, mean);
  }
  throw UsageError("poisson_misclassification: bright must be 0, 1 or 2");
}

double check_rejection_probability(const DetectionModel& model, int bright) {
  const double mean = (model.dark_rate + bright * model.bright_rate) * model.check_duration;
  return 1.0 - poisson_cdf(model.check_threshold, mean);
}

}  // namespace ca43
