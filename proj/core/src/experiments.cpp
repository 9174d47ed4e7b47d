#include "ca43/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ca43/errors.hpp"
#include "ca43/ms_numeric.hpp"

namespace ca43 {

namespace {

constexpr double kPi = std::numbers::pi;

SequenceStep make_step(StepKind kind, std::string label, double duration, int a, int b, double theta,
                       double error) {
  SequenceStep s;
  s.kind = kind;
  s.label = std::move(label);
  s.duration = duration;
  s.level_a = a;
  s.level_b = b;
  s.theta = theta;
  s.error_rate = error;
  return s;
}

std::vector<SequenceStep> concat(std::vector<SequenceStep> a, const std::vector<SequenceStep>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

SequenceStep detect_step() {
  SequenceStep d;
  d.kind = StepKind::detect;
  d.label = "Detect";
  return d;
}

template <class F>
double bisect_increasing(F f, double target, double lo, double hi, int iterations = 60) {
  double flo = f(lo), fhi = f(hi);
  if (target <= flo) return lo;
  if (target >= fhi) return hi;
  for (int k = 0; k < iterations; ++k) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) < target) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

SequenceContext sequence_context(const ExperimentConfig& config) {
  SequenceContext ctx;
  ctx.species = config.species;
  ctx.field = config.field;
  ctx.optical_upper = config.optical_upper();
  ctx.mode = config.motional_mode();
  ctx.gate = maximally_entangling_pulse(ctx.mode, config.gate_detuning);
  ctx.gate.qubit = config.beam == BeamId::beam2 ? optical_qubit_prime() : optical_qubit();
  ctx.noise = config.resolved_noise();
  ctx.noise.rng_seed = config.seed;
  ctx.detection = config.detection;
  return ctx;
}

std::vector<SequenceStep> preparation_steps(const StepErrors& e) {
  std::vector<SequenceStep> seq;
  SequenceStep pump = make_step(StepKind::optical_pump, "Opt. pumping", 600.0, level::stretched, level::down, 0.0,
                                e.pump);
  seq.push_back(pump);
  seq.push_back(make_step(StepKind::transfer_pulse, "Transfer 1", 20.0, level::stretched, level::shelf, kPi,
                          e.transfer1));
  seq.push_back(make_step(StepKind::pmt_check, "PMT check", 500.0, level::down, level::optical, 0.0, 0.0));
  SequenceStep t2 = make_step(StepKind::transfer_pulse, "Transfer 2", 20.0, level::shelf, level::down, kPi,
                              e.transfer2);
  t2.subtotal = "Total prep.";
  seq.push_back(t2);
  return seq;
}

SequenceStep ms_step(const std::string& label, double error, const SequenceContext& ctx) {
  return make_step(StepKind::ms_gate, label, ctx.gate.duration, level::down, level::optical, 0.0, error);
}

std::vector<SequenceStep> map_steps(const std::string& label, double error) {
  SequenceStep mw = make_step(StepKind::microwave_pulse, label, 60.0, level::down, level::up, kPi, 0.0);
  SequenceStep opt = make_step(StepKind::carrier_pulse, label, 60.0, level::down, level::optical, kPi, error);
  opt.error_levels = QubitIndices{level::down, level::up};
  return {mw, opt};
}

std::vector<SequenceStep> map_inverse_steps(const std::string& label, double error) {
  SequenceStep opt = make_step(StepKind::carrier_pulse, label, 60.0, level::down, level::optical, kPi, 0.0);
  SequenceStep mw = make_step(StepKind::microwave_pulse, label, 60.0, level::down, level::up, kPi, error);
  mw.error_levels = QubitIndices{level::down, level::optical};
  return {opt, mw};
}

SequenceStep wait_step(const std::string& label, double wait_ms, double error, QubitKind qubit) {
  const int b = qubit == QubitKind::hyperfine ? level::up : level::optical;
  SequenceStep w = make_step(StepKind::wait, label, wait_ms * 1e3, level::down, b, 0.0, error);
  w.wait_ms = wait_ms;
  return w;
}

std::vector<SequenceStep> analysis_steps(QubitKind qubit, double shelve_error) {
  if (qubit == QubitKind::optical)
    return {make_step(StepKind::parity_analysis, "Analysis", 10.0, level::down, level::optical, kPi / 2.0, 0.0)};
  return {make_step(StepKind::parity_analysis, "Analysis", 30.0, level::down, level::up, kPi / 2.0, 0.0),
          make_step(StepKind::shelve, "Shelve", 40.0, level::down, level::detect_shelf, kPi, shelve_error)};
}

std::vector<SequenceStep> budget_sequence(const StepErrors& e, const SequenceContext& ctx) {
  std::vector<SequenceStep> seq = preparation_steps(e);
  seq.push_back(ms_step("MS 1", e.ms1, ctx));
  seq = concat(seq, map_steps("Map", e.map));
  seq.push_back(wait_step("Wait", 20.0, e.wait, QubitKind::hyperfine));
  seq = concat(seq, map_inverse_steps("Map^-1", e.map_inverse));
  seq.push_back(ms_step("MS 2", e.ms2, ctx));
  seq.push_back(ms_step("MS 3", e.ms3, ctx));
  return seq;
}

std::vector<SequenceStep> bell_sequence(const StepErrors& e, const SequenceContext& ctx, QubitKind qubit) {
  std::vector<SequenceStep> seq = preparation_steps(e);
  seq.push_back(ms_step("MS 1", e.ms1, ctx));
  if (qubit == QubitKind::hyperfine) seq = concat(seq, map_steps("Map", e.map));
  return seq;
}

std::vector<SequenceStep> calibrate_sequence(std::vector<SequenceStep> seq, const SequenceContext& ctx,
                                             const StepErrors& e) {
  validate_sequence(seq, ctx);
  // Knob values leave the ideal states untouched.
  const std::vector<Eigen::VectorXcd> ideal = ideal_states(seq, ctx);
  const Eigen::VectorXcd start = pair_basis_state(level::down, level::down);
  for (const auto& [first, last] : budget_rows(seq)) {
    if (seq[first].kind == StepKind::pmt_check) {
      // Fraction of pumping failures left bright, hence rejected by the check.
      std::size_t pump = seq.size();
      for (std::size_t k = 0; k < first; ++k)
        if (seq[k].kind == StepKind::optical_pump) pump = k;
      if (pump == seq.size() || seq[pump].error_rate == 0.0) continue;
      const std::vector<SequenceStep> prefix(seq.begin(), seq.begin() + static_cast<long>(last) + 1);
      auto fidelity = [&](double bf) {
        std::vector<SequenceStep> trial = prefix;
        trial[pump].bright_fraction = bf;
        return run_ensemble(trial, ctx).back().fidelity;
      };
      seq[pump].bright_fraction = bisect_increasing(fidelity, e.pmt_fidelity, 0.0, 1.0);
      continue;
    }
    // The knob is the last error-carrying step of the row; its configured value is the target.
    std::size_t knob = last + 1;
    for (std::size_t k = first; k <= last; ++k)
      if (seq[k].error_rate > 0.0) knob = k;
    if (knob > last) continue;
    const bool noisy = std::any_of(seq.begin() + static_cast<long>(first), seq.begin() + static_cast<long>(last) + 1,
                                   [](const SequenceStep& s) { return s.kind == StepKind::wait && s.wait_ms > 0.0; });
    const double target = seq[knob].error_rate;
    const bool population_knob = seq[knob].kind == StepKind::optical_pump ||
                                 seq[knob].kind == StepKind::transfer_pulse || seq[knob].kind == StepKind::shelve;
    std::vector<SequenceStep> row(seq.begin() + static_cast<long>(first), seq.begin() + static_cast<long>(last) + 1);
    const Eigen::VectorXcd& input = first == 0 ? start : ideal[first - 1];
    auto row_error = [&](double v) {
      row[knob - first].error_rate = v;
      return step_infidelity(row, input, ctx);
    };
    if (noisy && row_error(0.0) > target)
      warn("row '" + seq[first].label + "': dephasing alone exceeds the configured error; no excess added");
    seq[knob].error_rate = bisect_increasing(row_error, target, 0.0, population_knob ? 1.0 : 0.75);
  }
  return seq;
}

BellExperiment bell_experiment(const std::vector<SequenceStep>& prefix, QubitKind qubit, const SequenceContext& ctx,
                               int population_shots, int phases, int shots_per_phase, std::uint64_t seed,
                               double shelve_error) {
  const std::vector<SequenceStep> analysis = analysis_steps(qubit, shelve_error);
  std::vector<SequenceStep> pop = prefix;
  for (const SequenceStep& s : analysis)
    if (s.kind == StepKind::shelve) pop.push_back(s);
  pop.push_back(detect_step());

  BellExperiment out;
  out.populations = run_sequence(pop, ctx, population_shots, stream_seed(seed, 0, 0xB0));
  out.parity = parity_scan(prefix, analysis, ctx, uniform_phases(phases), shots_per_phase, stream_seed(seed, 1, 0xB0));
  out.fit = fit_parity(out.parity);
  const double even = out.populations.p0.value + out.populations.p2.value;
  const double sigma_even = std::sqrt(even * (1.0 - even) / out.populations.kept);
  out.fidelity = estimate_fidelity(out.populations.p0.value, out.populations.p2.value,
                                   std::clamp(out.fit.contrast.value, 0.0, 1.0), sigma_even, out.fit.contrast.sigma);
  out.ensemble_fidelity = run_ensemble(prefix, ctx).back().fidelity;
  return out;
}

BellExperiment bell_experiment(const ExperimentConfig& config) {
  const SequenceContext ctx = sequence_context(config);
  const StepErrors e = config.step_errors ? config.errors : StepErrors{0, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0};
  const std::vector<SequenceStep> seq = calibrate_sequence(bell_sequence(e, ctx, config.qubit), ctx, e);
  const int per_phase = std::max(1, config.shots / config.phases);
  return bell_experiment(seq, config.qubit, ctx, config.shots, config.phases, per_phase, config.seed, e.shelve);
}

DecayExperiment decay_experiment(QubitKind qubit, const std::vector<double>& wait_times, int shots, std::uint64_t seed,
                                 const SequenceContext& ctx, const StepErrors& errors, bool step_errors, int phases) {
  if (wait_times.empty()) throw UsageError("decay_experiment: wait_times must be nonempty");
  const StepErrors e = step_errors ? errors : StepErrors{0, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0};
  const std::vector<SequenceStep> bell = calibrate_sequence(bell_sequence(e, ctx, qubit), ctx, e);
  const int per_phase = std::max(1, shots / phases);
  const int population_shots = std::max(1, shots / 4);

  DecayExperiment out;
  std::vector<DecaySample> samples;
  for (std::size_t i = 0; i < wait_times.size(); ++i) {
    std::vector<SequenceStep> prefix = bell;
    prefix.push_back(wait_step("Wait", wait_times[i], 0.0, qubit));
    const BellExperiment b =
        bell_experiment(prefix, qubit, ctx, population_shots, phases, per_phase, stream_seed(seed, i, 0xDE), e.shelve);
    DecayPoint p;
    p.t = wait_times[i];
    p.fit = b.fit;
    const double even = b.populations.p0.value + b.populations.p2.value;
    p.even_population = {even, std::sqrt(even * (1.0 - even) / b.populations.kept)};
    p.fidelity = b.fidelity;
    out.points.push_back(p);
    samples.push_back({p.t, p.fit.contrast.value, std::max(p.fit.contrast.sigma, 1e-6)});
  }
  out.fit = fit_gaussian_decay(samples);
  return out;
}

DecayExperiment decay_experiment(const ExperimentConfig& config) {
  return decay_experiment(config.qubit, config.wait_times, config.shots, config.seed, sequence_context(config),
                          config.errors, config.step_errors, config.phases);
}

std::vector<BudgetRow> error_budget(const ExperimentConfig& config) {
  const SequenceContext ctx = sequence_context(config);
  const StepErrors e = config.step_errors ? config.errors : StepErrors{0, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0};
  return error_budget(calibrate_sequence(budget_sequence(e, ctx), ctx, e), ctx);
}

AsymmetryResult input_asymmetry(const IonSpecies& species, const AsymmetryScenario& sc) {
  BeamGeometry beam = sc.beam;
  beam.impurity = sc.impurity >= 0.0
                      ? sc.impurity
                      : calibrate_impurity(species, named::down, sc.qubit_upper, beam, sc.field, sc.impurity_target);
  beam.validate();

  AsymmetryResult r;
  r.impurity = beam.impurity;
  const auto s = eigenlevels(species, Manifold::S12, sc.field);
  const auto d = eigenlevels(species, Manifold::D52, sc.field);
  const ZeemanLevel& up = find_level(d, sc.qubit_upper);
  const double f_qubit = transition_frequency(find_level(s, named::down), up);
  const double f_spec = transition_frequency(find_level(s, sc.spectator_lower), up);
  r.spectator_offset = f_spec - f_qubit;
  r.spectator_relative_rabi = relative_rabi(species, sc.spectator_lower, sc.qubit_upper, beam, sc.field) /
                              relative_rabi(species, named::down, sc.qubit_upper, beam, sc.field);
  r.red_tone_gap = std::abs(r.spectator_offset + sc.mode.frequency + 1e-3 * sc.gate_detuning) * 1e3;

  BichromaticPulse pulse = maximally_entangling_pulse(sc.mode, sc.gate_detuning);
  pulse.qubit = NamedQubit{"optical'", named::down, sc.qubit_upper, QubitKind::optical};
  pulse.index = {0, 1};
  MsNumericOptions opts;
  opts.offresonant_terms = sc.offresonant_terms;
  if (sc.spectator_enabled) opts.spectators.push_back({2, 1, r.spectator_relative_rabi, r.spectator_offset});

  const double chi = ms_analytic(pulse, sc.mode).chi();
  const Eigen::VectorXcd target = bell_state(3, {0, 1}, chi);
  r.fidelity_lower_input = gate_fidelity(ms_numeric_bell(pulse, sc.mode, 3, 0, 0, opts), target, true);
  r.fidelity_upper_input = gate_fidelity(ms_numeric_bell(pulse, sc.mode, 3, 1, 1, opts), target, true);
  return r;
}

}  // namespace ca43
