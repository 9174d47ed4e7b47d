#pragma once

// Quasi-static collective dephasing and Gaussian decay fits.
//
// Each shot draws a field offset dB (G) and a laser frequency offset dnu (kHz),
// constant over the shot. Local level l picks up the phase
//   2 pi (s_l dB + L_l dnu) t,   t in ms,
// with s_l its field sensitivity (kHz/G) and L_l = 1 for D5/2 levels (laser
// frame), 0 otherwise. Field and laser offsets are independent, so their
// variances add.

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "ca43/atomic_structure.hpp"
#include "ca43/joint_state.hpp"

namespace ca43 {

struct NoiseModel {
  double b_field_rms = 0.0;      // G
  double laser_freq_rms = 0.0;   // kHz, optical transitions only
  double laser_linewidth = 20.0; // Hz, informational; see laser_rms_from_linewidth
  double excess_error_per_gate = 0.0;
  std::uint64_t rng_seed = 1;

  void validate() const;
};

/// Gaussian-line rms of a laser with the given FWHM (Hz), scaled by a fiber
/// noise multiplier, in kHz.
double laser_rms_from_linewidth(double fwhm_hz, double fiber_multiplier = 1.0);

struct ShotOffsets {
  double field = 0.0;  // G
  double laser = 0.0;  // kHz
};

/// Deterministic per (seed, shot, stream); independent of evaluation order.
ShotOffsets sample_shot_offsets(const NoiseModel& noise, std::uint64_t shot, std::uint64_t stream = 0);

/// Seed for an auxiliary generator tied to (seed, shot, stream).
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t shot, std::uint64_t stream);

/// Per-level noise couplings of a local basis.
struct LevelCouplings {
  std::vector<double> field;  // kHz/G
  std::vector<double> laser;  // 1 for levels in the laser frame (D5/2)
};

/// Two-level couplings of a named qubit at field B.
LevelCouplings qubit_couplings(const IonSpecies& species, const NamedQubit& qubit, double field);

/// Ensemble-averaged channel for a wait of t ms. Populations are unchanged.
JointState apply_dephasing(const JointState& state, double t_ms, const NoiseModel& noise,
                           const LevelCouplings& couplings);
JointState apply_dephasing(const JointState& state, double t_ms, const NoiseModel& noise, const IonSpecies& species,
                           const NamedQubit& qubit, double field);

/// Diagonal per-shot phase unitary on the pair space for given offsets.
Eigen::VectorXcd shot_phases(const LevelCouplings& couplings, const ShotOffsets& offsets, double t_ms);

/// Rms angular rate (rad/ms) of the |ll>-|uu> Bell coherence. Collective:
/// twice the single-ion differential rate.
double bell_dephasing_rate(const NoiseModel& noise, const LevelCouplings& couplings, QubitIndices q = {});

/// exp(-(sigma t)^2 / 2) for each t.
std::vector<double> contrast_curve(const NoiseModel& noise, const LevelCouplings& couplings,
                                   const std::vector<double>& times_ms, QubitIndices q = {});
/// Monte-Carlo estimate: mean of cos(Bell phase) over `shots` shots per time.
std::vector<double> contrast_curve_mc(const NoiseModel& noise, const LevelCouplings& couplings,
                                      const std::vector<double>& times_ms, int shots, QubitIndices q = {});

/// Half-life of the analytic curve, ms (infinite without noise).
double analytic_t_half(const NoiseModel& noise, const LevelCouplings& couplings, QubitIndices q = {});

struct DecaySample {
  double t = 0.0;      // ms
  double value = 0.0;
  double sigma = 0.0;
};

struct DecayFit {
  bool ok = false;            // fit converged
  bool identifiable = false;  // finite decay constant resolved from the data
  double c0 = 0.0;
  double tau = std::numeric_limits<double>::infinity();     // ms
  double t_half = std::numeric_limits<double>::infinity();  // ms, tau sqrt(ln 2)
  double tau_sigma = std::numeric_limits<double>::infinity();
  double c0_sigma = 0.0;
  double residual_rms = 0.0;
  double chi2 = 0.0;
  int iterations = 0;
  std::string diagnostics;
};

/// Weighted least squares of c0 exp(-(t/tau)^2). Never throws on bad data;
/// failure is reported through ok / identifiable / diagnostics.
DecayFit fit_gaussian_decay(const std::vector<DecaySample>& samples);

/// Field and laser rms reproducing the optical and hyperfine Bell half-lives at field B.
NoiseModel calibrate_noise(const IonSpecies& species, double field, double t_half_optical_ms,
                           double t_half_hyperfine_ms);

}  // namespace ca43
