#pragma once

// Experiment configuration files and named presets.
//
// A config is an INI file. [experiment] preset selects the defaults, every other
// key overrides them. Unknown presets raise UnknownPresetError.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "ca43/atomic_structure.hpp"
#include "ca43/coupling_spectrum.hpp"
#include "ca43/detection.hpp"
#include "ca43/errors.hpp"
#include "ca43/joint_state.hpp"
#include "ca43/key_value.hpp"
#include "ca43/noise.hpp"
#include "ca43/species.hpp"

namespace ca43 {

class UnknownPresetError : public UsageError {
 public:
  using UsageError::UsageError;
};

/// Per-step errors of the entangle, store and re-entangle sequence (fractions).
struct StepErrors {
  double pump = 0.011;
  double transfer1 = 0.007;
  double pmt_fidelity = 0.993;  // state fidelity after the PMT check
  double transfer2 = 0.0005;
  double ms1 = 0.023;
  double map = 0.002;
  double wait = 0.022;           // total error of the storage wait, dephasing included
  double map_inverse = 0.007;
  double ms2 = 0.037;
  double ms3 = 0.029;
  double shelve = 0.0;           // per shelving step before hyperfine detection
};

struct ExperimentConfig {
  std::string preset;
  std::string source = "<preset>";

  IonSpecies species = IonSpecies::ca43();
  double field = 6.0;                 // G
  BeamId beam = BeamId::beam1;
  double impurity = -1.0;             // negative: calibrated from the neighbour suppression
  double impurity_target = 38.0;
  QubitKind qubit = QubitKind::optical;

  int shots = 2000;                   // per scan point
  std::uint64_t seed = 1;
  int phases = 8;                     // parity analysis phases over [0, 2 pi)

  double axial_frequency = 1.2;       // MHz
  double gate_detuning = 10.0;        // kHz
  double lamb_dicke_eta = -1.0;       // negative: from the 729 nm geometry
  double nbar = 0.03;
  int n_max = 30;

  bool calibrate_noise = true;
  double t_half_optical = 3.43;       // ms
  double t_half_hyperfine = 96.0;     // ms
  NoiseModel noise{};

  DetectionModel detection = DetectionModel::standard();
  StepErrors errors{};
  bool step_errors = true;            // false: every error knob zero

  std::vector<double> wait_times;     // ms, decay presets

  Manifold manifold = Manifold::D52;  // levels
  double span = 60.0;                 // MHz, spectrum
  bool include_sidebands = true;
  int lower_F = 4;
  int upper_F = -1;                   // -1: every D5/2 multiplet
  double coincidence_threshold = 0.05;  // MHz

  LevelLabel clock_lower{Manifold::S12, 4, 0};
  LevelLabel clock_upper{Manifold::S12, 3, 1};
  double clock_lo = 1.0;              // G
  double clock_hi = 300.0;            // G

  double min_field = 0.0;             // levels: field grid
  int field_points = 1;

  /// Throws ConfigError on inconsistent values.
  void validate() const;

  BeamGeometry beam_geometry() const;
  MotionalMode motional_mode() const;
  /// Noise model after optional calibration against both half-lives.
  NoiseModel resolved_noise() const;
  /// Upper optical qubit level for the configured beam.
  LevelLabel optical_upper() const;
};

const std::vector<std::string>& preset_names();
std::string_view preset_description(std::string_view name);
ExperimentConfig preset_config(std::string_view name);

/// Preset named inside the file (or `preset_override` when non-empty), then the file's keys.
ExperimentConfig load_experiment_config(const std::filesystem::path& path, std::string_view preset_override = {});
ExperimentConfig experiment_config_from(const KeyValueFile& file, std::string_view preset_override = {});

/// "optical" / "hyperfine".
QubitKind parse_qubit_kind(std::string_view text);
std::string_view to_string(QubitKind kind);

/// "S(4,0)" / "D(6,1)".
LevelLabel parse_level_label(std::string_view text);
std::vector<double> parse_number_list(std::string_view text);

}  // namespace ca43
