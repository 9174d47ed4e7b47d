#pragma once

// Preset sequences and the experiments built on them.

#include <optional>
#include <string>
#include <vector>

#include "ca43/coupling_spectrum.hpp"
#include "ca43/experiment_config.hpp"
#include "ca43/noise.hpp"
#include "ca43/sequence.hpp"

namespace ca43 {

/// Runner context of a config: species, field, optical level, gate, noise, detection.
SequenceContext sequence_context(const ExperimentConfig& config);

/// Optical pumping, transfer, PMT check and transfer to |down down>.
std::vector<SequenceStep> preparation_steps(const StepErrors& e);
SequenceStep ms_step(const std::string& label, double error, const SequenceContext& ctx);
/// Hyperfine pi pulse then optical pi pulse: optical Bell state -> hyperfine Bell state.
std::vector<SequenceStep> map_steps(const std::string& label, double error);
/// Optical pi pulse then hyperfine pi pulse.
std::vector<SequenceStep> map_inverse_steps(const std::string& label, double error);
SequenceStep wait_step(const std::string& label, double wait_ms, double error, QubitKind qubit);
/// Analysis pi/2 pulse (+ shelving of |down> for the hyperfine qubit).
std::vector<SequenceStep> analysis_steps(QubitKind qubit, double shelve_error = 0.0);

/// The full entangle, map, wait, unmap, MS, MS sequence with uncalibrated knobs.
std::vector<SequenceStep> budget_sequence(const StepErrors& e, const SequenceContext& ctx);
/// Bell preparation for the given qubit (map appended for hyperfine).
std::vector<SequenceStep> bell_sequence(const StepErrors& e, const SequenceContext& ctx, QubitKind qubit);

/// Sets the per-step knobs so each row's single-step infidelity equals its
/// configured error, and the pumping bright fraction so the state fidelity after
/// the PMT check equals `e.pmt_fidelity`. Zero errors give zero knobs.
std::vector<SequenceStep> calibrate_sequence(std::vector<SequenceStep> seq, const SequenceContext& ctx,
                                             const StepErrors& e);

struct BellExperiment {
  ExperimentResult populations;
  std::vector<ParityPoint> parity;
  ParityFit fit;
  FidelityEstimate fidelity;
  double ensemble_fidelity = 0.0;  // density-matrix fidelity of the prepared state
};

BellExperiment bell_experiment(const std::vector<SequenceStep>& prefix, QubitKind qubit, const SequenceContext& ctx,
                               int population_shots, int phases, int shots_per_phase, std::uint64_t seed,
                               double shelve_error = 0.0);
BellExperiment bell_experiment(const ExperimentConfig& config);

struct DecayPoint {
  double t = 0.0;  // ms
  ParityFit fit;
  Estimate even_population;
  FidelityEstimate fidelity;
};

struct DecayExperiment {
  std::vector<DecayPoint> points;
  DecayFit fit;  // Gaussian decay of the parity contrast
};

DecayExperiment decay_experiment(QubitKind qubit, const std::vector<double>& wait_times, int shots, std::uint64_t seed,
                                 const SequenceContext& ctx, const StepErrors& errors, bool step_errors = true,
                                 int phases = 8);
DecayExperiment decay_experiment(const ExperimentConfig& config);

std::vector<BudgetRow> error_budget(const ExperimentConfig& config);

/// Bell fidelity of one MS gate from |down down> and from |up' up'> with a
/// spectator line of the optical qubit driven by both tones.
struct AsymmetryScenario {
  double field = 3.4;                          // G
  BeamGeometry beam = BeamGeometry::beam2();   // impurity < 0 in `impurity`: calibrated
  double impurity = -1.0;
  double impurity_target = 38.0;
  LevelLabel qubit_upper = named::upsilon_prime;
  LevelLabel spectator_lower{Manifold::S12, 4, 1};
  MotionalMode mode = [] {
    MotionalMode m;
    m.n_max = 14;
    return m;
  }();
  double gate_detuning = 10.0;                 // kHz
  bool spectator_enabled = true;
  bool offresonant_terms = false;
};

struct AsymmetryResult {
  double impurity = 0.0;
  double spectator_offset = 0.0;         // MHz from the qubit line
  double spectator_relative_rabi = 0.0;  // relative to the qubit line
  double red_tone_gap = 0.0;             // kHz, |spectator offset - red tone|
  double fidelity_lower_input = 0.0;     // |down down>
  double fidelity_upper_input = 0.0;     // |up' up'>
};

AsymmetryResult input_asymmetry(const IonSpecies& species, const AsymmetryScenario& scenario);

}  // namespace ca43
