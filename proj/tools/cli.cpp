#include "cli.hpp"

#include <cmath>
#include <filesystem>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "ca43/atomic_structure.hpp"
#include "ca43/coupling_spectrum.hpp"
#include "ca43/errors.hpp"
#include "ca43/experiment_config.hpp"
#include "ca43/experiments.hpp"
#include "ca43/version.hpp"
#include "output.hpp"

namespace ca43::cli {

namespace {

namespace fs = std::filesystem;

std::string num(double v) { return format_number(v); }
std::string num(int v) { return std::to_string(v); }

struct GlobalOptions {
  std::string config;
  std::string preset;
  std::optional<std::uint64_t> seed;
  std::optional<int> shots;
  std::string out = ".";
};

// Options of one subcommand that override config values.
struct CommandOptions {
  std::optional<double> field;
  std::optional<std::string> manifold;
  std::optional<double> min_field;
  std::optional<int> points;
  std::optional<std::string> beam;
  std::optional<double> span;
  std::optional<bool> sidebands;
  std::optional<std::string> qubit;
  std::optional<double> clock_step;
};

std::string preset_listing() {
  std::ostringstream s;
  s << "Presets:\n";
  for (const auto& name : preset_names()) s << "  " << std::left << std::setw(18) << name << preset_description(name) << "\n";
  return s.str();
}

std::string default_preset(const std::string& command, const CommandOptions& o) {
  const bool hyperfine = o.qubit && *o.qubit == "hyperfine";
  if (command == "bell") return hyperfine ? "bell_hyperfine" : "bell_optical";
  if (command == "decay") return hyperfine ? "decay_hyperfine" : "decay_optical";
  if (command == "budget") return "budget_table";
  if (command == "clockpoint") return "clock_point";
  return "spectrum_report";
}

ExperimentConfig resolve_config(const std::string& command, const GlobalOptions& g, const CommandOptions& o) {
  ExperimentConfig c;
  if (!g.config.empty()) {
    const KeyValueFile file = KeyValueFile::load(g.config);
    std::string override_preset = g.preset;
    if (override_preset.empty() && !file.has("experiment.preset")) override_preset = default_preset(command, o);
    c = experiment_config_from(file, override_preset);
    c.source = g.config;
  } else {
    c = preset_config(g.preset.empty() ? default_preset(command, o) : g.preset);
  }
  if (g.seed) c.seed = *g.seed;
  if (g.shots) c.shots = *g.shots;
  if (o.field) c.field = *o.field;
  if (o.manifold && *o.manifold != "all") c.manifold = parse_manifold(*o.manifold);
  if (o.min_field) c.min_field = *o.min_field;
  if (o.points) c.field_points = *o.points;
  if (o.beam) c.beam = parse_beam(*o.beam);
  if (o.span) c.span = *o.span;
  if (o.sidebands) c.include_sidebands = *o.sidebands;
  if (o.qubit) c.qubit = parse_qubit_kind(*o.qubit);
  c.validate();
  return c;
}

class Runner {
 public:
  Runner(std::string command, const GlobalOptions& g, const ExperimentConfig& c, std::ostream& out)
      : g_(g), config_(c), out_(out) {
    manifest_.command = std::move(command);
    manifest_.preset = c.preset;
    manifest_.config_path = g.config.empty() ? "none" : g.config;
    manifest_.seed = c.seed;
    manifest_.out_dir = g.out;
    manifest_.tool_version = std::string(version());
    manifest_.timestamp = manifest_timestamp(manifest_.config_path);
  }

  void write(const std::string& name, const CsvTable& table) {
    const fs::path path = fs::path(g_.out) / name;
    write_file_atomic(path, table.render(manifest_));
    out_ << "wrote " << path.string() << " (" << table.size() << " rows)\n";
  }

  const ExperimentConfig& config() const { return config_; }
  std::ostream& out() { return out_; }

 private:
  const GlobalOptions& g_;
  const ExperimentConfig& config_;
  std::ostream& out_;
  RunManifest manifest_;
};

void cmd_levels(Runner& r, const CommandOptions& o) {
  const ExperimentConfig& c = r.config();
  std::vector<Manifold> manifolds = {c.manifold};
  if (o.manifold && *o.manifold == "all") manifolds = {Manifold::S12, Manifold::D52};
  std::vector<double> fields;
  if (c.field_points == 1) {
    fields.push_back(c.field);
  } else {
    for (int k = 0; k < c.field_points; ++k)
      fields.push_back(c.min_field + (c.field - c.min_field) * k / (c.field_points - 1));
  }
  CsvTable t({"field_G", "manifold", "F", "mF", "energy_MHz", "sensitivity_MHz_per_G"});
  for (Manifold m : manifolds) {
    ZeemanTracker tracker(c.species, m);
    for (double b : fields)
      for (const ZeemanLevel& l : tracker.levels_at(b)) {
        const double sens = l.eigenvector.dot(tracker.zeeman() * l.eigenvector);
        t.row({num(b), std::string(to_string(m)), num(l.F), num(l.mF), num(l.energy), num(sens)});
      }
  }
  r.write("levels.csv", t);
}

void cmd_spectrum(Runner& r) {
  const ExperimentConfig& c = r.config();
  SpectrumOptions so;
  so.field = c.field;
  so.beam = c.beam_geometry();
  so.reference_upper = c.optical_upper();
  if (c.lower_F >= 0) so.lower_F = c.lower_F;
  if (c.upper_F >= 0) so.upper_F = c.upper_F;
  so.span = c.span;
  so.include_sidebands = c.include_sidebands;
  so.axial_frequency = c.axial_frequency;
  CsvTable t({"offset_MHz", "relative_rabi", "delta_m", "lower", "upper", "kind"});
  for (const TransitionLine& l : spectrum(c.species, so))
    t.row({num(l.offset), num(l.relative_rabi), num(l.delta_m), l.lower.str(), l.upper.str(),
           std::string(to_string(l.tag))});
  r.write("spectrum.csv", t);

  CoincidenceOptions co;
  co.threshold = c.coincidence_threshold;
  co.beam = so.beam;
  co.reference_upper = so.reference_upper;
  CsvTable ct({"description", "sideband", "gap_MHz", "lower", "upper", "relative_rabi"});
  for (const Coincidence& x : coincidence_report(c.species, c.field, c.axial_frequency, co))
    ct.row({x.description, x.sideband, num(x.gap), x.carrier.lower.str(), x.carrier.upper.str(),
            num(x.carrier.relative_rabi)});
  r.write("coincidences.csv", ct);
  r.out() << "beam impurity " << num(so.beam.impurity) << ", " << ct.size() << " coincidence(s) within "
          << num(c.coincidence_threshold * 1e3) << " kHz\n";
}

void cmd_bell(Runner& r) {
  const ExperimentConfig& c = r.config();
  const BellExperiment b = bell_experiment(c);
  CsvTable parity({"phase_rad", "parity", "sigma"});
  for (const ParityPoint& p : b.parity) parity.row({num(p.phase), num(p.parity), num(p.sigma)});
  r.write("bell_parity.csv", parity);

  const ExperimentResult& pop = b.populations;
  CsvTable s({"quantity", "value", "sigma"});
  s.row({"p0", num(pop.p0.value), num(pop.p0.sigma)})
      .row({"p1", num(pop.p1.value), num(pop.p1.sigma)})
      .row({"p2", num(pop.p2.value), num(pop.p2.sigma)})
      .row({"raw_p0", num(pop.raw_p0.value), num(pop.raw_p0.sigma)})
      .row({"raw_p1", num(pop.raw_p1.value), num(pop.raw_p1.sigma)})
      .row({"raw_p2", num(pop.raw_p2.value), num(pop.raw_p2.sigma)})
      .row({"rejected_fraction", num(pop.rejected_fraction), "0"})
      .row({"contrast", num(b.fit.contrast.value), num(b.fit.contrast.sigma)})
      .row({"contrast_dft", num(b.fit.contrast_dft.value), num(b.fit.contrast_dft.sigma)})
      .row({"parity_phase_rad", num(b.fit.phase), "0"})
      .row({"fidelity", num(b.fidelity.value), num(b.fidelity.sigma)})
      .row({"ensemble_fidelity", num(b.ensemble_fidelity), "0"});
  r.write("bell_summary.csv", s);
  r.out() << std::fixed << std::setprecision(4) << to_string(c.qubit) << " Bell state: p0 " << pop.p0.value
          << ", p1 " << pop.p1.value << ", p2 " << pop.p2.value << ", contrast " << b.fit.contrast.value
          << ", fidelity " << b.fidelity.value << " +- " << b.fidelity.sigma << "\n"
          << std::defaultfloat;
  if (!b.fidelity.consistent) r.out() << "warning: fidelity exceeds 1 by more than 3 sigma\n";
}

void cmd_budget(Runner& r) {
  const std::vector<BudgetRow> rows = error_budget(r.config());
  CsvTable t({"step", "duration_us", "step_error_pct", "fidelity_pct", "kept_fraction", "summary"});
  for (const BudgetRow& b : rows)
    t.row({b.step, num(b.duration), num(100.0 * b.step_error), num(100.0 * b.fidelity), num(b.kept),
           b.summary ? "1" : "0"});
  r.write("budget.csv", t);

  std::ostream& o = r.out();
  o << std::left << std::setw(16) << "Step" << std::right << std::setw(15) << "Duration (us)" << std::setw(12)
    << "Error (%)" << std::setw(15) << "Fidelity (%)" << "\n";
  o << std::fixed;
  for (const BudgetRow& b : rows) {
    o << std::left << std::setw(16) << (b.summary ? b.step : "  " + b.step) << std::right << std::setw(15)
      << std::setprecision(0) << b.duration << std::setw(12) << std::setprecision(2) << 100.0 * b.step_error
      << std::setw(15) << std::setprecision(2) << 100.0 * b.fidelity << "\n";
  }
  o << std::defaultfloat;
}

void cmd_decay(Runner& r) {
  const ExperimentConfig& c = r.config();
  const DecayExperiment d = decay_experiment(c);
  CsvTable t({"t_ms", "contrast", "contrast_sigma", "contrast_dft", "even_population", "even_sigma", "fidelity",
              "fidelity_sigma"});
  for (const DecayPoint& p : d.points)
    t.row({num(p.t), num(p.fit.contrast.value), num(p.fit.contrast.sigma), num(p.fit.contrast_dft.value),
           num(p.even_population.value), num(p.even_population.sigma), num(p.fidelity.value),
           num(p.fidelity.sigma)});
  r.write("decay.csv", t);

  const double root_ln2 = std::sqrt(std::log(2.0));
  CsvTable f({"quantity", "value", "sigma"});
  f.row({"c0", num(d.fit.c0), num(d.fit.c0_sigma)})
      .row({"tau_ms", num(d.fit.tau), num(d.fit.tau_sigma)})
      .row({"t_half_ms", num(d.fit.t_half), num(d.fit.tau_sigma * root_ln2)})
      .row({"residual_rms", num(d.fit.residual_rms), "0"})
      .row({"chi2", num(d.fit.chi2), "0"})
      .row({"converged", d.fit.ok ? "1" : "0", "0"})
      .row({"identifiable", d.fit.identifiable ? "1" : "0", "0"});
  r.write("decay_fit.csv", f);
  r.out() << to_string(c.qubit) << " contrast decay: t_half " << num(d.fit.t_half) << " ms +- "
          << num(d.fit.tau_sigma * root_ln2) << "\n";
  if (!d.fit.diagnostics.empty()) r.out() << "fit: " << d.fit.diagnostics << "\n";
}

void cmd_clockpoint(Runner& r, const CommandOptions& o) {
  const ExperimentConfig& c = r.config();
  const double step = o.clock_step.value_or(1.0);
  if (!(step > 0.0)) throw ConfigError("--step must be positive");
  if (c.clock_lower.manifold != c.clock_upper.manifold) throw ConfigError("clock levels must share a manifold");

  ZeemanTracker tracker(c.species, c.clock_lower.manifold);
  auto sensitivity = [&](const ZeemanLevel& a, const ZeemanLevel& b) {
    return b.eigenvector.dot(tracker.zeeman() * b.eigenvector) - a.eigenvector.dot(tracker.zeeman() * a.eigenvector);
  };
  CsvTable scan({"field_G", "frequency_MHz", "sensitivity_MHz_per_G"});
  const int n = static_cast<int>(std::floor((c.clock_hi - c.clock_lo) / step + 1e-9));
  for (int k = 0; k <= n; ++k) {
    const double b = c.clock_lo + k * step;
    const ZeemanLevel a = tracker.level_at(c.clock_lower, b);
    const ZeemanLevel u = tracker.level_at(c.clock_upper, b);
    scan.row({num(b), num(u.energy - a.energy), num(sensitivity(a, u))});
  }
  r.write("clockpoint_scan.csv", scan);

  const std::optional<double> b0 = find_insensitive_field(c.species, c.clock_lower, c.clock_upper, c.clock_lo, c.clock_hi);
  CsvTable res({"quantity", "value"});
  res.row({"lower", c.clock_lower.str()}).row({"upper", c.clock_upper.str()});
  if (b0) {
    const ZeemanLevel a = tracker.level_at(c.clock_lower, *b0);
    const ZeemanLevel u = tracker.level_at(c.clock_upper, *b0);
    constexpr double h = 0.1;
    const double curvature =
        (sensitivity(tracker.level_at(c.clock_lower, *b0 + h), tracker.level_at(c.clock_upper, *b0 + h)) -
         sensitivity(tracker.level_at(c.clock_lower, *b0 - h), tracker.level_at(c.clock_upper, *b0 - h))) /
        (2.0 * h);
    res.row({"field_G", num(*b0)})
        .row({"frequency_MHz", num(u.energy - a.energy)})
        .row({"second_order_kHz_per_G2", num(1e3 * curvature / 2.0)});
    r.out() << c.clock_lower.str() << " <-> " << c.clock_upper.str() << " is field insensitive at " << num(*b0)
            << " G\n";
  } else {
    res.row({"field_G", "none"});
    r.out() << "no field-insensitive point in [" << num(c.clock_lo) << ", " << num(c.clock_hi) << "] G\n";
  }
  r.write("clockpoint.csv", res);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Trapped 43Ca+ two-qubit simulator: level structure, spectra, gates, sequences and error budgets",
               "ca43sim"};
  app.footer(preset_listing());
  app.set_version_flag("--version", std::string(version()));
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("--config", g.config, "Experiment config file (INI)")->check(CLI::ExistingFile);
  app.add_option("--preset", g.preset, "Preset supplying the defaults (see list below)");
  app.add_option("--seed", g.seed, "Random seed");
  app.add_option("--shots", g.shots, "Shots per scan point")->check(CLI::PositiveNumber);
  app.add_option("--out", g.out, "Output directory for CSV files")->capture_default_str();

  CommandOptions o;
  auto* levels = app.add_subcommand("levels", "Zeeman level table with energies and field sensitivities");
  levels->add_option("--field", o.field, "Field in G (upper end of the grid with --points)");
  levels->add_option("--manifold", o.manifold, "S12, D52 or all")->check(CLI::IsMember({"S12", "D52", "all"}));
  levels->add_option("--min-field", o.min_field, "Lower end of the field grid in G");
  levels->add_option("--points", o.points, "Number of grid fields")->check(CLI::PositiveNumber);

  auto* spec = app.add_subcommand("spectrum", "S1/2 <-> D5/2 line list relative to the optical qubit line");
  spec->add_option("--field", o.field, "Field in G");
  spec->add_option("--beam", o.beam, "beam1 or beam2")->check(CLI::IsMember({"beam1", "beam2"}));
  spec->add_option("--span", o.span, "Frequency window in MHz");
  spec->add_flag("--sidebands,!--no-sidebands", o.sidebands, "Include motional and micromotion sideband markers");

  auto* bell = app.add_subcommand("bell", "Bell state preparation, parity scan and fidelity");
  bell->add_option("--qubit", o.qubit, "optical or hyperfine")->check(CLI::IsMember({"optical", "hyperfine"}));
  auto* budget = app.add_subcommand("budget", "Step-by-step error budget");
  auto* decay = app.add_subcommand("decay", "Bell state contrast decay and Gaussian fit");
  decay->add_option("--qubit", o.qubit, "optical or hyperfine")->check(CLI::IsMember({"optical", "hyperfine"}));
  auto* clock = app.add_subcommand("clockpoint", "Field-insensitive point of a hyperfine transition");
  clock->add_option("--step", o.clock_step, "Scan step in G");
  for (auto* sub : {levels, spec, bell, budget, decay, clock}) sub->footer(preset_listing());

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? exit_ok : exit_usage;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    const ExperimentConfig config = resolve_config(command, g, o);
    Runner r(command, g, config, out);
    if (command == "levels") cmd_levels(r, o);
    else if (command == "spectrum") cmd_spectrum(r);
    else if (command == "bell") cmd_bell(r);
    else if (command == "budget") cmd_budget(r);
    else if (command == "decay") cmd_decay(r);
    else cmd_clockpoint(r, o);
  } catch (const UnknownPresetError& e) {
    err << "error: " << e.what() << "\n" << preset_listing();
    return exit_usage;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return exit_usage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_runtime;
  }
  return exit_ok;
}

}  // namespace ca43::cli
