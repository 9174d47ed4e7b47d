#include "ca43/experiment_config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <set>

namespace ca43 {

namespace {

struct PresetInfo {
  std::string_view name;
  std::string_view description;
};

constexpr PresetInfo kPresets[] = {
    {"bell_optical", "Bell state on the optical qubit at 6 G: populations, parity scan, fidelity"},
    {"bell_hyperfine", "Bell state mapped to the hyperfine clock qubit: populations, parity scan, fidelity"},
    {"decay_optical", "contrast decay of the optical Bell state versus wait time"},
    {"decay_hyperfine", "contrast decay of the hyperfine Bell state versus wait time"},
    {"budget_table", "step-by-step error budget of the entangle, store and re-entangle sequence"},
    {"spectrum_report", "S1/2 <-> D5/2 spectrum with sidebands and coincidence report"},
    {"clock_point", "search for the field-insensitive hyperfine clock point"},
};

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "experiment.preset", "experiment.field", "experiment.beam", "experiment.impurity",
      "experiment.impurity_target", "experiment.qubit", "experiment.shots", "experiment.seed",
      "experiment.phases", "experiment.species",
      "gate.axial_frequency", "gate.detuning", "gate.eta", "gate.nbar", "gate.n_max",
      "noise.calibrate", "noise.t_half_optical", "noise.t_half_hyperfine", "noise.b_field_rms",
      "noise.laser_freq_rms", "noise.laser_linewidth", "noise.excess_error_per_gate",
      "detection.bright_rate", "detection.dark_rate", "detection.detect_duration", "detection.check_duration",
      "detection.check_threshold", "detection.d_decay_lifetime", "detection.cut_low", "detection.cut_high",
      "errors.enabled", "errors.pump", "errors.transfer1", "errors.pmt_fidelity", "errors.transfer2",
      "errors.ms1", "errors.map", "errors.wait", "errors.map_inverse", "errors.ms2", "errors.ms3",
      "errors.shelve",
      "decay.wait_times",
      "levels.manifold", "levels.min_field", "levels.field_points",
      "spectrum.span", "spectrum.sidebands", "spectrum.lower_F", "spectrum.upper_F", "spectrum.threshold",
      "clock.lower", "clock.upper", "clock.lo", "clock.hi",
  };
  return keys;
}

int parse_int(std::string_view s) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw ConfigError("not an integer: '" + std::string(s) + "'");
  return v;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

QubitKind parse_qubit_kind(std::string_view text) {
  if (text == "optical") return QubitKind::optical;
  if (text == "hyperfine") return QubitKind::hyperfine;
  throw ConfigError("unknown qubit kind '" + std::string(text) + "' (expected optical or hyperfine)");
}

std::string_view to_string(QubitKind kind) { return kind == QubitKind::optical ? "optical" : "hyperfine"; }

LevelLabel parse_level_label(std::string_view text) {
  const std::string t = trim(text);
  const auto open = t.find('(');
  const auto comma = t.find(',');
  const auto close = t.find(')');
  if (open == std::string::npos || comma == std::string::npos || close == std::string::npos || comma < open ||
      close < comma || close + 1 != t.size())
    throw ConfigError("level label must look like S(4,0), got '" + t + "'");
  LevelLabel l;
  l.manifold = parse_manifold(trim(std::string_view(t).substr(0, open)));
  l.F = parse_int(trim(std::string_view(t).substr(open + 1, comma - open - 1)));
  l.mF = parse_int(trim(std::string_view(t).substr(comma + 1, close - comma - 1)));
  if (std::abs(l.mF) > l.F) throw ConfigError("|mF| exceeds F in '" + t + "'");
  return l;
}

std::vector<double> parse_number_list(std::string_view text) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = std::min(text.find(',', start), text.size());
    const std::string item = trim(text.substr(start, end - start));
    if (item.empty()) throw ConfigError("empty entry in number list '" + std::string(text) + "'");
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc() || ptr != item.data() + item.size()) throw ConfigError("not a number: '" + item + "'");
    out.push_back(v);
    start = end + 1;
  }
  return out;
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& p : kPresets) v.emplace_back(p.name);
    return v;
  }();
  return names;
}

std::string_view preset_description(std::string_view name) {
  for (const auto& p : kPresets)
    if (p.name == name) return p.description;
  throw UnknownPresetError("unknown preset '" + std::string(name) + "'");
}

ExperimentConfig preset_config(std::string_view name) {
  (void)preset_description(name);
  ExperimentConfig c;
  c.preset = std::string(name);
  if (name == "bell_optical" || name == "bell_hyperfine") {
    c.qubit = name == "bell_optical" ? QubitKind::optical : QubitKind::hyperfine;
    c.shots = 4000;
    c.phases = 8;
  } else if (name == "decay_optical") {
    c.qubit = QubitKind::optical;
    c.shots = 2000;
    c.wait_times = {0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 5.0, 6.0, 8.0};
  } else if (name == "decay_hyperfine") {
    c.qubit = QubitKind::hyperfine;
    c.shots = 2000;
    c.wait_times = {0.0, 10.0, 20.0, 40.0, 60.0, 80.0, 100.0, 120.0, 150.0, 200.0};
  } else if (name == "spectrum_report") {
    c.span = 60.0;
  } else if (name == "clock_point") {
    c.clock_lo = 1.0;
    c.clock_hi = 300.0;
  }
  return c;
}

ExperimentConfig experiment_config_from(const KeyValueFile& f, std::string_view preset_override) {
  for (const auto& [key, value] : f.entries())
    if (!known_keys().count(key)) throw ConfigError(f.origin() + ": unknown key '" + key + "'");

  const std::string preset =
      preset_override.empty() ? f.get_string("experiment.preset", "") : std::string(preset_override);
  if (preset.empty()) throw ConfigError(f.origin() + ": no preset given");
  ExperimentConfig c = preset_config(preset);
  c.source = f.origin();

  if (auto p = f.get("experiment.species")) {
    // Relative paths are taken from the directory of the config file.
    std::filesystem::path sp(*p);
    const std::filesystem::path origin(f.origin());
    if (sp.is_relative() && std::filesystem::is_regular_file(origin)) sp = origin.parent_path() / sp;
    c.species = load_species(sp);
  }
  c.field = f.get_double("experiment.field", c.field);
  if (auto b = f.get("experiment.beam")) c.beam = parse_beam(*b);
  c.impurity = f.get_double("experiment.impurity", c.impurity);
  c.impurity_target = f.get_double("experiment.impurity_target", c.impurity_target);
  if (auto q = f.get("experiment.qubit")) c.qubit = parse_qubit_kind(*q);
  c.shots = static_cast<int>(f.get_int("experiment.shots", c.shots));
  const long seed = f.get_int("experiment.seed", static_cast<long>(c.seed));
  if (seed < 0) throw ConfigError(f.origin() + ": seed must be non-negative");
  c.seed = static_cast<std::uint64_t>(seed);
  c.phases = static_cast<int>(f.get_int("experiment.phases", c.phases));

  c.axial_frequency = f.get_double("gate.axial_frequency", c.axial_frequency);
  c.gate_detuning = f.get_double("gate.detuning", c.gate_detuning);
  c.lamb_dicke_eta = f.get_double("gate.eta", c.lamb_dicke_eta);
  c.nbar = f.get_double("gate.nbar", c.nbar);
  c.n_max = static_cast<int>(f.get_int("gate.n_max", c.n_max));

  c.calibrate_noise = f.get_bool("noise.calibrate", c.calibrate_noise);
  c.t_half_optical = f.get_double("noise.t_half_optical", c.t_half_optical);
  c.t_half_hyperfine = f.get_double("noise.t_half_hyperfine", c.t_half_hyperfine);
  c.noise.b_field_rms = f.get_double("noise.b_field_rms", c.noise.b_field_rms);
  c.noise.laser_freq_rms = f.get_double("noise.laser_freq_rms", c.noise.laser_freq_rms);
  c.noise.laser_linewidth = f.get_double("noise.laser_linewidth", c.noise.laser_linewidth);
  c.noise.excess_error_per_gate = f.get_double("noise.excess_error_per_gate", c.noise.excess_error_per_gate);
  if (c.calibrate_noise && (f.has("noise.b_field_rms") || f.has("noise.laser_freq_rms")))
    throw ConfigError(f.origin() + ": explicit noise rms values require noise.calibrate = false");

  DetectionModel& d = c.detection;
  d.bright_rate = f.get_double("detection.bright_rate", d.bright_rate);
  d.dark_rate = f.get_double("detection.dark_rate", d.dark_rate);
  d.detect_duration = f.get_double("detection.detect_duration", d.detect_duration);
  d.check_duration = f.get_double("detection.check_duration", d.check_duration);
  d.check_threshold = static_cast<int>(f.get_int("detection.check_threshold", d.check_threshold));
  d.d_decay_lifetime = f.get_double("detection.d_decay_lifetime", c.species.d_lifetime);
  if (d.dark_rate > 0.0 && d.bright_rate > d.dark_rate) d.set_default_cuts();
  d.cut_low = f.get_double("detection.cut_low", d.cut_low);
  d.cut_high = f.get_double("detection.cut_high", d.cut_high);

  StepErrors& e = c.errors;
  c.step_errors = f.get_bool("errors.enabled", c.step_errors);
  e.pump = f.get_double("errors.pump", e.pump);
  e.transfer1 = f.get_double("errors.transfer1", e.transfer1);
  e.pmt_fidelity = f.get_double("errors.pmt_fidelity", e.pmt_fidelity);
  e.transfer2 = f.get_double("errors.transfer2", e.transfer2);
  e.ms1 = f.get_double("errors.ms1", e.ms1);
  e.map = f.get_double("errors.map", e.map);
  e.wait = f.get_double("errors.wait", e.wait);
  e.map_inverse = f.get_double("errors.map_inverse", e.map_inverse);
  e.ms2 = f.get_double("errors.ms2", e.ms2);
  e.ms3 = f.get_double("errors.ms3", e.ms3);
  e.shelve = f.get_double("errors.shelve", e.shelve);

  if (auto w = f.get("decay.wait_times")) c.wait_times = parse_number_list(*w);

  if (auto m = f.get("levels.manifold")) c.manifold = parse_manifold(*m);
  c.min_field = f.get_double("levels.min_field", c.min_field);
  c.field_points = static_cast<int>(f.get_int("levels.field_points", c.field_points));

  c.span = f.get_double("spectrum.span", c.span);
  c.include_sidebands = f.get_bool("spectrum.sidebands", c.include_sidebands);
  c.lower_F = static_cast<int>(f.get_int("spectrum.lower_F", c.lower_F));
  c.upper_F = static_cast<int>(f.get_int("spectrum.upper_F", c.upper_F));
  c.coincidence_threshold = f.get_double("spectrum.threshold", c.coincidence_threshold);

  if (auto l = f.get("clock.lower")) c.clock_lower = parse_level_label(*l);
  if (auto u = f.get("clock.upper")) c.clock_upper = parse_level_label(*u);
  c.clock_lo = f.get_double("clock.lo", c.clock_lo);
  c.clock_hi = f.get_double("clock.hi", c.clock_hi);

  c.validate();
  return c;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path, std::string_view preset_override) {
  return experiment_config_from(KeyValueFile::load(path), preset_override);
}

void ExperimentConfig::validate() const {
  species.validate();
  if (!(field >= 0.0)) throw ConfigError("field must be >= 0");
  if (impurity >= 0.0) beam_geometry().validate();
  if (!(impurity_target > 1.0)) throw ConfigError("impurity target suppression must exceed 1");
  if (shots <= 0) throw ConfigError("shots must be positive");
  if (phases < 3) throw ConfigError("at least three analysis phases are needed");
  if (!(axial_frequency > 0.0) || !(gate_detuning > 0.0)) throw ConfigError("trap and gate frequencies must be positive");
  if (!(nbar >= 0.0) || n_max < 1) throw ConfigError("invalid motional state");
  if (!(t_half_optical > 0.0) || !(t_half_hyperfine > 0.0)) throw ConfigError("half-lives must be positive");
  noise.validate();
  detection.validate();
  for (double v : {errors.pump, errors.transfer1, errors.transfer2, errors.ms1, errors.map, errors.wait,
                   errors.map_inverse, errors.ms2, errors.ms3, errors.shelve})
    if (!(v >= 0.0 && v <= 0.5)) throw ConfigError("step errors must lie in [0, 0.5]");
  if (!(errors.pmt_fidelity > 0.0 && errors.pmt_fidelity <= 1.0)) throw ConfigError("pmt_fidelity must lie in (0, 1]");
  for (double t : wait_times)
    if (!(t >= 0.0)) throw ConfigError("wait times must be >= 0");
  if (!(span > 0.0)) throw ConfigError("spectrum span must be positive");
  if (!(coincidence_threshold >= 0.0)) throw ConfigError("coincidence threshold must be >= 0");
  if (!(clock_hi > clock_lo) || clock_lo < 0.0) throw ConfigError("clock search range must satisfy 0 <= lo < hi");
  if (field_points < 1 || !(min_field >= 0.0) || (field_points > 1 && !(field > min_field)))
    throw ConfigError("levels field grid must satisfy 0 <= min_field < field");
  motional_mode().validate();
}

BeamGeometry ExperimentConfig::beam_geometry() const {
  BeamGeometry g = beam == BeamId::beam2 ? BeamGeometry::beam2() : BeamGeometry::beam1();
  g.impurity = impurity >= 0.0 ? impurity
                               : calibrate_impurity(species, named::down, optical_upper(), g, field, impurity_target);
  return g;
}

MotionalMode ExperimentConfig::motional_mode() const {
  const double beam_angle_to_axis =
      (beam == BeamId::beam2 ? BeamGeometry::beam2() : BeamGeometry::beam1()).angle_k_to_axis;
  MotionalMode m;
  m.frequency = axial_frequency;
  m.nbar = nbar;
  m.n_max = n_max;
  m.lamb_dicke_eta = lamb_dicke_eta > 0.0
                         ? lamb_dicke_eta
                         : lamb_dicke_com(729.347, species.mass_amu, axial_frequency, beam_angle_to_axis);
  return m;
}

NoiseModel ExperimentConfig::resolved_noise() const {
  if (!calibrate_noise) return noise;
  NoiseModel n = ca43::calibrate_noise(species, field, t_half_optical, t_half_hyperfine);
  n.laser_linewidth = noise.laser_linewidth;
  n.excess_error_per_gate = noise.excess_error_per_gate;
  return n;
}

LevelLabel ExperimentConfig::optical_upper() const {
  return beam == BeamId::beam2 ? named::upsilon_prime : named::upsilon;
}

}  // namespace ca43
