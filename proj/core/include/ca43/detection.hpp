#pragma once

// Photon-counting state detection of two ions on one PMT.

#include <cstdint>
#include <random>
#include <vector>

namespace ca43 {

struct DetectionModel {
  double bright_rate = 20.0;      // photons/ms per bright ion
  double dark_rate = 0.2;         // photons/ms background
  double detect_duration = 3.0;   // ms
  double check_duration = 0.5;    // ms
  int check_threshold = 3;        // reject a shot when more photons are counted in the check
  double d_decay_lifetime = 1.2;  // s
  double cut_low = 0.0;           // counts <= cut_low -> 0 bright ions
  double cut_high = 0.0;          // counts <= cut_high -> 1 bright ion, above -> 2

  /// Defaults with the log-Poisson midpoint cuts.
  static DetectionModel standard();
  /// Throws ConfigError on a weak bright/dark contrast or non-monotone cuts.
  void validate() const;

  /// (mu_b - mu_a) / ln(mu_b / mu_a): where the two Poisson pmfs cross.
  static double log_poisson_cut(double mu_a, double mu_b);
  void set_default_cuts();

  int classify(long counts) const;
};

struct DetectionOutcome {
  long counts = 0;
  int bright_ions = 0;  // classification
  int decays = 0;       // dark ions that decayed during the window
};

/// Photon counts of one window. `bright` ions scatter for the whole window; each
/// of the `dark` ions decays with probability 1 - exp(-t / tau) at a uniformly
/// drawn epoch and scatters for the remainder.
DetectionOutcome simulate_detection(int bright, int dark, const DetectionModel& model, std::mt19937_64& rng);

/// True when the PMT check counts more than the threshold.
bool check_rejects(int bright, const DetectionModel& model, std::mt19937_64& rng);

/// Exact probability that a dark ion (alone with a dark partner count of
/// `other_bright` bright ions) is classified into a higher bright count:
/// integral over the decay epoch of the Poisson tail above the cut.
double decay_misclassification(const DetectionModel& model, int other_bright = 0);
/// Poisson overlap: probability that k bright ions are classified as another count.
double poisson_misclassification(const DetectionModel& model, int bright);
/// Probability that the check rejects a shot with `bright` S-manifold ions.
double check_rejection_probability(const DetectionModel& model, int bright);

double poisson_cdf(long k, double mean);

}  // namespace ca43
