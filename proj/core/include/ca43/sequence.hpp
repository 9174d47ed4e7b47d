#pragma once

// Shot-by-shot execution of two-ion pulse sequences.
//
// Every ion lives in a fixed set of local levels (see `level`). The runner has
// two paths over the same step semantics:
//   run_sequence   pure-state trajectories with per-shot noise and detection,
//   run_ensemble   density matrices averaged over all stochastic branches.
//
// Step error knobs:
//   optical_pump     two-ion failure probability e; each ion fails with
//                    1 - sqrt(1 - e) and lands in the bright reservoir with
//                    probability `bright_fraction`, otherwise in the dark one.
//   transfer_pulse,  two-ion failure probability e; a failed ion stays put.
//   shelve
//   carrier_pulse,   infidelity e of a two-qubit depolarizing channel (strength
//   microwave_pulse, 4e/3) on `error_levels`, applied after the ideal operation.
//   ms_gate,
//   parity_analysis,
//   wait
// A wait additionally dephases with the quasi-static noise model.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ca43/detection.hpp"
#include "ca43/gate_dynamics.hpp"
#include "ca43/noise.hpp"
#include "ca43/species.hpp"

namespace ca43 {

namespace level {
inline constexpr int down = 0;              // S(4,0)
inline constexpr int up = 1;                // S(3,0)
inline constexpr int optical = 2;           // upper optical qubit level
inline constexpr int shelf = 3;             // D(3,2), preparation intermediate
inline constexpr int stretched = 4;         // S(4,4)
inline constexpr int bright_reservoir = 5;  // other S1/2 levels
inline constexpr int dark_reservoir = 6;    // other D5/2 levels
inline constexpr int detect_shelf = 7;      // D5/2 levels used to shelve before detection
inline constexpr int count = 8;
}  // namespace level

/// S1/2 levels fluoresce during detection.
bool is_bright(int local_level);
std::string_view level_name(int local_level);
/// Accepts the names returned by level_name.
int parse_level(std::string_view name);

enum class StepKind {
  optical_pump,
  transfer_pulse,
  pmt_check,
  carrier_pulse,
  microwave_pulse,
  ms_gate,
  wait,
  shelve,
  detect,
  parity_analysis
};
std::string_view to_string(StepKind kind);
StepKind parse_step_kind(std::string_view text);

struct SequenceStep {
  StepKind kind = StepKind::carrier_pulse;
  std::string label;       // budget row; consecutive steps with one label form a row
  std::string subtotal;    // when set, a summary row of that name follows this row
  double duration = 0.0;   // us
  int level_a = level::down;
  int level_b = level::optical;
  double theta = 3.141592653589793;
  double phase = 0.0;      // rad; parity_analysis adds the scanned phase
  double wait_ms = 0.0;
  double error_rate = 0.0;
  double bright_fraction = 0.0;
  std::optional<QubitIndices> error_levels;  // default: (level_a, level_b)

  QubitIndices pair() const { return {level_a, level_b}; }
  QubitIndices depolarized_levels() const { return error_levels.value_or(pair()); }
};

/// Physical setting shared by all steps of a run.
struct SequenceContext {
  IonSpecies species = IonSpecies::ca43();
  double field = 6.0;                      // G
  LevelLabel optical_upper = named::upsilon;
  MotionalMode mode{};
  BichromaticPulse gate{};                 // MS pulse; its level indices are set per step
  NoiseModel noise{};
  DetectionModel detection = DetectionModel::standard();

  /// Field sensitivity and laser-frame flag of each local level.
  LevelCouplings couplings() const;
  void validate() const;
};

/// Throws RunError naming the offending step.
void validate_sequence(const std::vector<SequenceStep>& seq, const SequenceContext& ctx);

struct Estimate {
  double value = 0.0;
  double sigma = 0.0;
};

struct ParityPoint {
  double phase = 0.0;
  double parity = 0.0;
  double sigma = 0.0;
};

struct ExperimentResult {
  int shots = 0;
  int kept = 0;
  Estimate p0, p1, p2;              // after rejection, renormalized
  Estimate raw_p0, raw_p1, raw_p2;  // all shots, rejection ignored
  double rejected_fraction = 0.0;
  double mean_counts = 0.0;          // photon counts of kept shots
};

/// Trajectory runner. A detect step is appended when the sequence has none.
/// Results depend only on (seq, ctx, shots, seed).
ExperimentResult run_sequence(const std::vector<SequenceStep>& seq, const SequenceContext& ctx, int shots,
                              std::uint64_t seed, double analysis_phase = 0.0);

/// For each phase: prefix + `analysis` steps (parity_analysis steps get the phase)
/// + detect. Parity = p0 + p2 - p1 with binomial sigma.
std::vector<ParityPoint> parity_scan(const std::vector<SequenceStep>& prefix,
                                     const std::vector<SequenceStep>& analysis, const SequenceContext& ctx,
                                     const std::vector<double>& phases, int shots_per_point, std::uint64_t seed);

/// Evenly spaced phases over [0, 2 pi).
std::vector<double> uniform_phases(int count);

struct ParityFit {
  Estimate contrast;      // sqrt(a^2 + b^2) of a cos 2phi + b sin 2phi + c
  Estimate offset;        // c
  double phase = 0.0;     // atan2(b, a) / 2
  Estimate contrast_dft;  // 2 |mean(P e^{-2 i phi})|
};
ParityFit fit_parity(const std::vector<ParityPoint>& data);

struct FidelityEstimate {
  double value = 0.0;
  double sigma = 0.0;
  bool consistent = true;  // false when value exceeds 1 by more than 3 sigma
};
/// (p0 + p2)/2 + contrast/2. Inputs must lie in [0, 1].
FidelityEstimate estimate_fidelity(double p0, double p2, double contrast, double sigma_populations = 0.0,
                                   double sigma_contrast = 0.0);

/// Density-matrix path.
struct EnsembleStepResult {
  Eigen::MatrixXcd rho;    // normalized to the kept shots
  Eigen::VectorXcd ideal;  // error- and noise-free pure state
  double kept = 1.0;       // cumulative acceptance probability
  double fidelity = 1.0;   // <ideal| rho |ideal>
};
std::vector<EnsembleStepResult> run_ensemble(const std::vector<SequenceStep>& seq, const SequenceContext& ctx);

/// Error- and noise-free state after each step, starting from |down down>.
std::vector<Eigen::VectorXcd> ideal_states(const std::vector<SequenceStep>& seq, const SequenceContext& ctx);
/// 1 - fidelity of `row` applied to its ideal input, against the ideal output.
double step_infidelity(const std::vector<SequenceStep>& row, const Eigen::VectorXcd& ideal_input,
                       const SequenceContext& ctx);
/// [first, last] step indices of each run of equal labels.
std::vector<std::pair<std::size_t, std::size_t>> budget_rows(const std::vector<SequenceStep>& seq);

/// |l1 l2> on the pair space of the runner.
Eigen::VectorXcd pair_basis_state(int l1, int l2);

struct BudgetRow {
  std::string step;
  double duration = 0.0;    // us
  double step_error = 0.0;  // infidelity of this row acting on its ideal input
  double fidelity = 1.0;    // state fidelity after the row
  double kept = 1.0;        // acceptance after the row
  bool summary = false;
};

/// Rows grouped by label, in sequence order. Detect steps are ignored.
std::vector<BudgetRow> error_budget(const std::vector<SequenceStep>& seq, const SequenceContext& ctx);

}  // namespace ca43
