#include "ca43/sequence.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numbers>
#include <random>

#include "ca43/errors.hpp"

namespace ca43 {

namespace {

constexpr int kDim = level::count;
constexpr int kPair = kDim * kDim;

constexpr std::array<std::string_view, kDim> kLevelNames = {
    "down", "up", "optical", "shelf", "stretched", "bright_reservoir", "dark_reservoir", "detect_shelf"};

constexpr std::array<std::pair<StepKind, std::string_view>, 10> kKindNames = {{
    {StepKind::optical_pump, "optical_pump"},
    {StepKind::transfer_pulse, "transfer_pulse"},
    {StepKind::pmt_check, "pmt_check"},
    {StepKind::carrier_pulse, "carrier_pulse"},
    {StepKind::microwave_pulse, "microwave_pulse"},
    {StepKind::ms_gate, "ms_gate"},
    {StepKind::wait, "wait"},
    {StepKind::shelve, "shelve"},
    {StepKind::detect, "detect"},
    {StepKind::parity_analysis, "parity_analysis"},
}};

bool is_transfer(StepKind k) { return k == StepKind::transfer_pulse || k == StepKind::shelve; }

bool is_coherent(StepKind k) {
  return k == StepKind::carrier_pulse || k == StepKind::microwave_pulse || k == StepKind::ms_gate ||
         k == StepKind::parity_analysis || k == StepKind::wait;
}

int bright_count(int pair_index) { return (is_bright(pair_index / kDim) ? 1 : 0) + (is_bright(pair_index % kDim) ? 1 : 0); }

Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

// Pauli w / 4 on ion 1 and w % 4 on ion 2 (I, X, Y, Z on two local levels,
// identity elsewhere) as a phased permutation: P|i> = phase[i] |to[i]>.
struct PairPauli {
  std::array<int, kPair> to{};
  std::array<cplx, kPair> phase{};
};

void local_pauli(QubitIndices q, int which, std::array<int, kDim>& to, std::array<cplx, kDim>& phase) {
  const cplx i(0.0, 1.0);
  for (int l = 0; l < kDim; ++l) {
    to[l] = l;
    phase[l] = 1.0;
  }
  const int a = q.lower, b = q.upper;
  switch (which) {
    case 1:
      to[a] = b; to[b] = a;
      break;
    case 2:
      to[a] = b; to[b] = a; phase[a] = i; phase[b] = -i;
      break;
    case 3:
      phase[b] = -1.0;
      break;
    default:
      break;
  }
}

PairPauli pair_pauli(QubitIndices q, int w) {
  std::array<int, kDim> t1{}, t2{};
  std::array<cplx, kDim> p1{}, p2{};
  local_pauli(q, w / 4, t1, p1);
  local_pauli(q, w % 4, t2, p2);
  PairPauli k;
  for (int l1 = 0; l1 < kDim; ++l1)
    for (int l2 = 0; l2 < kDim; ++l2) {
      k.to[l1 * kDim + l2] = t1[l1] * kDim + t2[l2];
      k.phase[l1 * kDim + l2] = p1[l1] * p2[l2];
    }
  return k;
}

double per_ion_failure(double two_ion_error) { return 1.0 - std::sqrt(1.0 - two_ion_error); }

// Step with its operators built once per run.
struct Prepared {
  SequenceStep step;
  Eigen::MatrixXcd pair_u;               // pulses: U x U
  std::array<Eigen::MatrixXcd, 4> branch;  // transfers: (ok, ok), (ok, fail), (fail, ok), (fail, fail)
  std::optional<MsChannel> channel;
  Eigen::MatrixXcd ms_u;                 // unitary without thermal phase
  double ms_sigma = 0.0;
  Eigen::MatrixXcd ms_vectors;           // eigenbasis of the collective sigma
  Eigen::VectorXd ms_values;
};

class Engine {
 public:
  explicit Engine(const SequenceContext& ctx) : ctx_(ctx), couplings_(ctx.couplings()) {
    for (int k = 0; k < 3; ++k) keep_[k] = 1.0 - check_rejection_probability(ctx.detection, k);
  }

  Prepared prepare(const SequenceStep& s, double extra_phase) const {
    Prepared p;
    p.step = s;
    switch (s.kind) {
      case StepKind::transfer_pulse:
      case StepKind::shelve: {
        const Eigen::MatrixXcd u = rotation(kDim, s.pair(), s.theta, s.phase);
        const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(kDim, kDim);
        p.pair_u = kron(u, u);
        p.branch = {p.pair_u, kron(u, id), kron(id, u), kron(id, id)};
        break;
      }
      case StepKind::carrier_pulse:
      case StepKind::microwave_pulse:
      case StepKind::parity_analysis: {
        const double ph = s.phase + (s.kind == StepKind::parity_analysis ? extra_phase : 0.0);
        p.pair_u = both_ions(rotation(kDim, s.pair(), s.theta, ph));
        break;
      }
      case StepKind::ms_gate: {
        BichromaticPulse pulse = ctx_.gate;
        pulse.index = s.pair();
        MsChannel ch = ms_analytic(pulse, ctx_.mode);
        ch.index = s.pair();
        p.ms_u = ch.unitary(kDim, 0.0);
        p.ms_sigma = std::sqrt(ch.thermal_phase_variance());
        p.channel = ch;
        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(collective_sigma(kDim, ch.index, ch.phase));
        p.ms_vectors = eig.eigenvectors();
        p.ms_values = eig.eigenvalues();
        break;
      }
      default:
        break;
    }
    return p;
  }

  std::vector<Prepared> prepare(const std::vector<SequenceStep>& seq, double extra_phase) const {
    std::vector<Prepared> out;
    out.reserve(seq.size());
    for (const SequenceStep& s : seq) out.push_back(prepare(s, extra_phase));
    return out;
  }

  // --- ideal pure state ---
  void ideal(Eigen::VectorXcd& psi, const Prepared& p) const {
    switch (p.step.kind) {
      case StepKind::optical_pump:
        psi = pair_basis_state(level::stretched, level::stretched);
        return;
      case StepKind::transfer_pulse:
      case StepKind::shelve:
      case StepKind::carrier_pulse:
      case StepKind::microwave_pulse:
      case StepKind::parity_analysis:
        psi = p.pair_u * psi;
        return;
      case StepKind::ms_gate:
        psi = p.ms_u * psi;
        return;
      case StepKind::pmt_check:
      case StepKind::wait:
      case StepKind::detect:
        return;
    }
  }

  // --- ensemble ---
  // Returns the acceptance probability of the step (1 except for the PMT check).
  double ensemble(Eigen::MatrixXcd& rho, const Prepared& p) const {
    const SequenceStep& s = p.step;
    switch (s.kind) {
      case StepKind::optical_pump: {
        const double f = per_ion_failure(s.error_rate);
        Eigen::MatrixXcd one = Eigen::MatrixXcd::Zero(kDim, kDim);
        one(level::stretched, level::stretched) = 1.0 - f;
        one(level::bright_reservoir, level::bright_reservoir) = f * s.bright_fraction;
        one(level::dark_reservoir, level::dark_reservoir) = f * (1.0 - s.bright_fraction);
        rho = kron(one, one);
        return 1.0;
      }
      case StepKind::transfer_pulse:
      case StepKind::shelve: {
        const double f = per_ion_failure(s.error_rate);
        const std::array<double, 4> w = {(1.0 - f) * (1.0 - f), (1.0 - f) * f, f * (1.0 - f), f * f};
        Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(kPair, kPair);
        for (int b = 0; b < 4; ++b)
          if (w[b] > 0.0) out.noalias() += w[b] * (p.branch[b] * rho * p.branch[b].adjoint());
        rho = out;
        return 1.0;
      }
      case StepKind::pmt_check: {
        Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(kPair, kPair);
        for (int i = 0; i < kPair; ++i)
          for (int j = 0; j < kPair; ++j)
            if (bright_count(i) == bright_count(j)) out(i, j) = keep_[bright_count(i)] * rho(i, j);
        const double kept = out.trace().real();
        if (!(kept > 0.0)) throw RunError(s.label.empty() ? "pmt_check" : s.label, "every shot is rejected");
        rho = out / kept;
        return kept;
      }
      case StepKind::carrier_pulse:
      case StepKind::microwave_pulse:
      case StepKind::parity_analysis:
        rho = p.pair_u * rho * p.pair_u.adjoint();
        depolarize(rho, s);
        return 1.0;
      case StepKind::ms_gate:
        rho = p.channel->apply(JointState::from_matrix(kDim, 1, rho)).rho();
        depolarize(rho, s);
        return 1.0;
      case StepKind::wait:
        if (s.wait_ms > 0.0)
          rho = apply_dephasing(JointState::from_matrix(kDim, 1, rho), s.wait_ms, ctx_.noise, couplings_).rho();
        depolarize(rho, s);
        return 1.0;
      case StepKind::detect:
        return 1.0;
    }
    return 1.0;
  }

  void depolarize(Eigen::MatrixXcd& rho, const SequenceStep& s) const {
    const double p = 4.0 * s.error_rate / 3.0;
    if (p == 0.0) return;
    Eigen::MatrixXcd twirl = Eigen::MatrixXcd::Zero(kPair, kPair);
    for (int w = 0; w < 16; ++w) {
      const PairPauli k = pair_pauli(s.depolarized_levels(), w);
      for (int j = 0; j < kPair; ++j)
        for (int i = 0; i < kPair; ++i) twirl(k.to[i], k.to[j]) += k.phase[i] * rho(i, j) * std::conj(k.phase[j]);
    }
    rho = (1.0 - p) * rho + (p / 16.0) * twirl;
  }

  // --- trajectories ---
  struct Shot {
    Eigen::VectorXcd psi;
    bool rejected = false;
    int bright = 0;
    DetectionOutcome outcome;
  };

  void trajectory(Shot& shot, const Prepared& p, const ShotOffsets& offsets, std::mt19937_64& rng) const {
    const SequenceStep& s = p.step;
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    switch (s.kind) {
      case StepKind::optical_pump: {
        const double f = per_ion_failure(s.error_rate);
        std::array<int, 2> l{};
        for (int& li : l) {
          if (uniform(rng) >= f) li = level::stretched;
          else li = uniform(rng) < s.bright_fraction ? level::bright_reservoir : level::dark_reservoir;
        }
        shot.psi = pair_basis_state(l[0], l[1]);
        return;
      }
      case StepKind::transfer_pulse:
      case StepKind::shelve: {
        const double f = per_ion_failure(s.error_rate);
        const bool f1 = uniform(rng) < f;
        const bool f2 = uniform(rng) < f;
        shot.psi = p.branch[(f1 ? 2 : 0) + (f2 ? 1 : 0)] * shot.psi;
        return;
      }
      case StepKind::pmt_check: {
        std::array<double, 3> w{};
        for (int i = 0; i < kPair; ++i) w[bright_count(i)] += std::norm(shot.psi(i));
        std::discrete_distribution<int> sector(w.begin(), w.end());
        const int k = sector(rng);
        if (check_rejects(k, ctx_.detection, rng)) shot.rejected = true;
        for (int i = 0; i < kPair; ++i)
          if (bright_count(i) != k) shot.psi(i) = 0.0;
        shot.psi.normalize();
        return;
      }
      case StepKind::carrier_pulse:
      case StepKind::microwave_pulse:
      case StepKind::parity_analysis:
        shot.psi = p.pair_u * shot.psi;
        random_pauli(shot.psi, s, rng);
        return;
      case StepKind::ms_gate: {
        if (p.ms_sigma > 0.0) {
          const double x = std::normal_distribution<double>(0.0, p.ms_sigma)(rng);
          // exp(-i phi S^2 + i x S) applied in the eigenbasis of S.
          Eigen::VectorXcd c = p.ms_vectors.adjoint() * shot.psi;
          for (Eigen::Index k = 0; k < c.size(); ++k) {
            const double l = p.ms_values(k);
            c(k) *= std::exp(cplx(0.0, x * l - p.channel->phi * l * l));
          }
          shot.psi = p.ms_vectors * c;
        } else {
          shot.psi = p.ms_u * shot.psi;
        }
        random_pauli(shot.psi, s, rng);
        return;
      }
      case StepKind::wait:
        if (s.wait_ms > 0.0) shot.psi = shot.psi.cwiseProduct(shot_phases(couplings_, offsets, s.wait_ms));
        random_pauli(shot.psi, s, rng);
        return;
      case StepKind::detect: {
        Eigen::VectorXd w = shot.psi.cwiseAbs2();
        std::discrete_distribution<int> pick(w.data(), w.data() + w.size());
        const int i = pick(rng);
        shot.bright = bright_count(i);
        shot.outcome = simulate_detection(shot.bright, 2 - shot.bright, ctx_.detection, rng);
        return;
      }
    }
  }

  void random_pauli(Eigen::VectorXcd& psi, const SequenceStep& s, std::mt19937_64& rng) const {
    const double p = 4.0 * s.error_rate / 3.0;
    if (p == 0.0) return;
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    if (uniform(rng) >= p) return;
    const int which = std::uniform_int_distribution<int>(0, 15)(rng);
    const PairPauli k = pair_pauli(s.depolarized_levels(), which);
    Eigen::VectorXcd out(kPair);
    for (int i = 0; i < kPair; ++i) out(k.to[i]) = k.phase[i] * psi(i);
    psi = out;
  }

 private:
  const SequenceContext& ctx_;
  LevelCouplings couplings_;
  std::array<double, 3> keep_{};
};

std::vector<SequenceStep> with_detect(const std::vector<SequenceStep>& seq) {
  std::vector<SequenceStep> out = seq;
  if (out.empty() || out.back().kind != StepKind::detect) {
    SequenceStep d;
    d.kind = StepKind::detect;
    d.label = "Detect";
    out.push_back(d);
  }
  return out;
}

Estimate binomial(int n, int total) {
  const double p = static_cast<double>(n) / total;
  return {p, std::sqrt(p * (1.0 - p) / total)};
}

}  // namespace

bool is_bright(int l) {
  return l == level::down || l == level::up || l == level::stretched || l == level::bright_reservoir;
}

std::string_view level_name(int l) {
  if (l < 0 || l >= kDim) throw UsageError("local level index out of range");
  return kLevelNames[l];
}

int parse_level(std::string_view name) {
  for (int l = 0; l < kDim; ++l)
    if (kLevelNames[l] == name) return l;
  throw ConfigError("unknown level name '" + std::string(name) + "'");
}

std::string_view to_string(StepKind kind) {
  for (const auto& [k, n] : kKindNames)
    if (k == kind) return n;
  return "?";
}

StepKind parse_step_kind(std::string_view text) {
  for (const auto& [k, n] : kKindNames)
    if (n == text) return k;
  throw ConfigError("unknown step kind '" + std::string(text) + "'");
}

LevelCouplings SequenceContext::couplings() const {
  // Level tracking is costly and contexts are rebuilt often; keep the last few results.
  struct Entry {
    IonSpecies species;
    double field;
    LevelLabel optical_upper;
    LevelCouplings couplings;
  };
  thread_local std::vector<Entry> cache;
  for (const Entry& e : cache)
    if (e.field == field && e.optical_upper == optical_upper && e.species == species) return e.couplings;
  LevelCouplings c;
  c.field.assign(kDim, 0.0);
  c.laser.assign(kDim, 0.0);
  const std::array<std::pair<int, LevelLabel>, 5> tracked = {{{level::down, named::down},
                                                              {level::up, named::up},
                                                              {level::optical, optical_upper},
                                                              {level::shelf, named::transfer},
                                                              {level::stretched, named::stretched}}};
  for (const auto& [l, label] : tracked) c.field[l] = 1e3 * level_sensitivity(species, label, field);
  for (int l = 0; l < kDim; ++l) c.laser[l] = is_bright(l) ? 0.0 : 1.0;
  if (cache.size() >= 8) cache.erase(cache.begin());
  cache.push_back({species, field, optical_upper, c});
  return c;
}

void SequenceContext::validate() const {
  species.validate();
  if (!(field > 0.0)) throw ConfigError("sequence field must be positive");
  if (optical_upper.manifold != Manifold::D52) throw ConfigError("optical qubit upper level must be a D5/2 level");
  mode.validate();
  noise.validate();
  detection.validate();
}

void validate_sequence(const std::vector<SequenceStep>& seq, const SequenceContext& ctx) {
  for (std::size_t i = 0; i < seq.size(); ++i) {
    const SequenceStep& s = seq[i];
    const std::string name = s.label.empty() ? std::string(to_string(s.kind)) + "#" + std::to_string(i) : s.label;
    auto fail = [&](const std::string& why) { throw RunError(name, why); };
    if (!(s.duration >= 0.0)) fail("duration must be >= 0");
    if (!(s.wait_ms >= 0.0)) fail("wait must be >= 0");
    if (!(s.error_rate >= 0.0 && s.error_rate <= 1.0)) fail("error rate must lie in [0, 1]");
    if (is_coherent(s.kind) && s.error_rate > 0.75) fail("depolarizing error above 0.75 is not a channel");
    if (!(s.bright_fraction >= 0.0 && s.bright_fraction <= 1.0)) fail("bright fraction must lie in [0, 1]");
    const bool uses_levels = is_transfer(s.kind) || is_coherent(s.kind);
    if (uses_levels) {
      for (int l : {s.level_a, s.level_b})
        if (l < 0 || l >= kDim) fail("level index out of range");
      if (s.kind != StepKind::wait && s.level_a == s.level_b) fail("pulse levels must differ");
      const QubitIndices e = s.depolarized_levels();
      if (e.lower < 0 || e.lower >= kDim || e.upper < 0 || e.upper >= kDim || e.lower == e.upper)
        fail("error levels invalid");
    }
  }
  try {
    ctx.validate();
    (void)ctx.couplings();
  } catch (const std::exception& e) {
    throw RunError("context", e.what());
  }
}

Eigen::VectorXcd pair_basis_state(int l1, int l2) {
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(kPair);
  v(l1 * kDim + l2) = 1.0;
  return v;
}

ExperimentResult run_sequence(const std::vector<SequenceStep>& seq_in, const SequenceContext& ctx, int shots,
                              std::uint64_t seed, double analysis_phase) {
  if (shots <= 0) throw UsageError("run_sequence: shots must be positive");
  const std::vector<SequenceStep> seq = with_detect(seq_in);
  validate_sequence(seq, ctx);
  Engine engine(ctx);
  const std::vector<Prepared> steps = engine.prepare(seq, analysis_phase);
  NoiseModel noise = ctx.noise;
  noise.rng_seed = seed;

  std::array<int, 3> kept_counts{}, raw_counts{};
  int kept = 0;
  double counts_sum = 0.0;
  for (int n = 0; n < shots; ++n) {
    std::mt19937_64 rng(stream_seed(seed, static_cast<std::uint64_t>(n), 1));
    const ShotOffsets offsets = sample_shot_offsets(noise, static_cast<std::uint64_t>(n), 0);
    Engine::Shot shot;
    shot.psi = pair_basis_state(level::down, level::down);
    for (const Prepared& p : steps) engine.trajectory(shot, p, offsets, rng);
    const int k = shot.outcome.bright_ions;
    ++raw_counts[k];
    if (!shot.rejected) {
      ++kept_counts[k];
      ++kept;
      counts_sum += static_cast<double>(shot.outcome.counts);
    }
  }
  if (kept == 0) throw RunError("pmt_check", "every shot was rejected");

  ExperimentResult r;
  r.shots = shots;
  r.kept = kept;
  r.p0 = binomial(kept_counts[0], kept);
  r.p1 = binomial(kept_counts[1], kept);
  r.p2 = binomial(kept_counts[2], kept);
  r.raw_p0 = binomial(raw_counts[0], shots);
  r.raw_p1 = binomial(raw_counts[1], shots);
  r.raw_p2 = binomial(raw_counts[2], shots);
  r.rejected_fraction = 1.0 - static_cast<double>(kept) / shots;
  r.mean_counts = counts_sum / kept;
  return r;
}

std::vector<double> uniform_phases(int count) {
  if (count <= 0) throw UsageError("uniform_phases: count must be positive");
  std::vector<double> out(count);
  for (int j = 0; j < count; ++j) out[j] = 2.0 * std::numbers::pi * j / count;
  return out;
}

std::vector<ParityPoint> parity_scan(const std::vector<SequenceStep>& prefix,
                                     const std::vector<SequenceStep>& analysis, const SequenceContext& ctx,
                                     const std::vector<double>& phases, int shots_per_point, std::uint64_t seed) {
  std::vector<SequenceStep> seq = prefix;
  seq.insert(seq.end(), analysis.begin(), analysis.end());
  std::vector<ParityPoint> out;
  out.reserve(phases.size());
  for (std::size_t j = 0; j < phases.size(); ++j) {
    const ExperimentResult r = run_sequence(seq, ctx, shots_per_point, stream_seed(seed, j, 0x5041), phases[j]);
    const double even = r.p0.value + r.p2.value;
    ParityPoint p;
    p.phase = phases[j];
    p.parity = even - r.p1.value;
    p.sigma = 2.0 * std::sqrt(even * (1.0 - even) / r.kept);
    out.push_back(p);
  }
  return out;
}

ParityFit fit_parity(const std::vector<ParityPoint>& data) {
  const int n = static_cast<int>(data.size());
  if (n < 3) throw UsageError("fit_parity needs at least three points");
  Eigen::MatrixXd a(n, 3);
  Eigen::VectorXd y(n), var(n);
  for (int j = 0; j < n; ++j) {
    a(j, 0) = std::cos(2.0 * data[j].phase);
    a(j, 1) = std::sin(2.0 * data[j].phase);
    a(j, 2) = 1.0;
    y(j) = data[j].parity;
    var(j) = data[j].sigma * data[j].sigma;
  }
  const Eigen::MatrixXd ata = a.transpose() * a;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(ata);
  if (!lu.isInvertible()) throw UsageError("fit_parity: phases do not resolve a period-pi fringe");
  const Eigen::MatrixXd pinv = lu.inverse() * a.transpose();
  const Eigen::Vector3d c = pinv * y;
  const Eigen::Matrix3d cov = pinv * var.asDiagonal() * pinv.transpose();

  ParityFit f;
  const double amp = std::hypot(c(0), c(1));
  f.contrast.value = amp;
  if (amp > 0.0) {
    const Eigen::Vector3d g(c(0) / amp, c(1) / amp, 0.0);
    f.contrast.sigma = std::sqrt(std::max(0.0, g.dot(cov * g)));
  } else {
    f.contrast.sigma = std::sqrt(std::max(0.0, 0.5 * (cov(0, 0) + cov(1, 1))));
  }
  f.offset = {c(2), std::sqrt(std::max(0.0, cov(2, 2)))};
  f.phase = 0.5 * std::atan2(c(1), c(0));

  cplx z = 0.0;
  for (int j = 0; j < n; ++j) z += data[j].parity * std::polar(1.0, -2.0 * data[j].phase);
  z *= 2.0 / n;
  f.contrast_dft.value = std::abs(z);
  double s2 = 0.0;
  const double arg = std::arg(z);
  for (int j = 0; j < n; ++j) {
    const double d = (2.0 / n) * std::cos(-2.0 * data[j].phase - arg);
    s2 += d * d * var(j);
  }
  f.contrast_dft.sigma = std::sqrt(s2);
  return f;
}

FidelityEstimate estimate_fidelity(double p0, double p2, double contrast, double sigma_populations,
                                   double sigma_contrast) {
  for (double v : {p0, p2, contrast})
    if (!(v >= 0.0 && v <= 1.0)) throw UsageError("estimate_fidelity: inputs must lie in [0, 1]");
  FidelityEstimate f;
  f.value = 0.5 * (p0 + p2) + 0.5 * contrast;
  f.sigma = 0.5 * std::hypot(sigma_populations, sigma_contrast);
  f.consistent = f.value <= 1.0 + 3.0 * f.sigma + 1e-12;
  return f;
}

std::vector<EnsembleStepResult> run_ensemble(const std::vector<SequenceStep>& seq, const SequenceContext& ctx) {
  validate_sequence(seq, ctx);
  Engine engine(ctx);
  Eigen::VectorXcd ideal = pair_basis_state(level::down, level::down);
  Eigen::MatrixXcd rho = ideal * ideal.adjoint();
  double kept = 1.0;
  std::vector<EnsembleStepResult> out;
  out.reserve(seq.size());
  for (const SequenceStep& s : seq) {
    const Prepared p = engine.prepare(s, 0.0);
    kept *= engine.ensemble(rho, p);
    engine.ideal(ideal, p);
    EnsembleStepResult r;
    r.rho = rho;
    r.ideal = ideal;
    r.kept = kept;
    r.fidelity = std::clamp((ideal.adjoint() * rho * ideal)(0, 0).real(), 0.0, 1.0);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<Eigen::VectorXcd> ideal_states(const std::vector<SequenceStep>& seq, const SequenceContext& ctx) {
  Engine engine(ctx);
  Eigen::VectorXcd psi = pair_basis_state(level::down, level::down);
  std::vector<Eigen::VectorXcd> out;
  out.reserve(seq.size());
  for (const SequenceStep& s : seq) {
    engine.ideal(psi, engine.prepare(s, 0.0));
    out.push_back(psi);
  }
  return out;
}

double step_infidelity(const std::vector<SequenceStep>& row, const Eigen::VectorXcd& ideal_input,
                       const SequenceContext& ctx) {
  Engine engine(ctx);
  Eigen::MatrixXcd rho = ideal_input * ideal_input.adjoint();
  Eigen::VectorXcd ideal = ideal_input;
  for (const SequenceStep& s : row) {
    const Prepared p = engine.prepare(s, 0.0);
    engine.ensemble(rho, p);
    engine.ideal(ideal, p);
  }
  return std::clamp(1.0 - (ideal.adjoint() * rho * ideal)(0, 0).real(), 0.0, 1.0);
}

std::vector<std::pair<std::size_t, std::size_t>> budget_rows(const std::vector<SequenceStep>& seq) {
  std::vector<std::pair<std::size_t, std::size_t>> rows;
  for (std::size_t i = 0; i < seq.size();) {
    std::size_t j = i;
    while (j + 1 < seq.size() && seq[j + 1].label == seq[i].label) ++j;
    rows.emplace_back(i, j);
    i = j + 1;
  }
  return rows;
}

std::vector<BudgetRow> error_budget(const std::vector<SequenceStep>& seq_in, const SequenceContext& ctx) {
  std::vector<SequenceStep> seq;
  for (const SequenceStep& s : seq_in)
    if (s.kind != StepKind::detect) seq.push_back(s);
  const std::vector<EnsembleStepResult> run = run_ensemble(seq, ctx);

  std::vector<BudgetRow> rows;
  double section_duration = 0.0;
  Eigen::VectorXcd ideal_in = pair_basis_state(level::down, level::down);
  for (const auto& [i, j] : budget_rows(seq)) {
    const std::vector<SequenceStep> row_steps(seq.begin() + static_cast<long>(i), seq.begin() + static_cast<long>(j) + 1);
    double duration = 0.0;
    std::string subtotal;
    for (const SequenceStep& s : row_steps) {
      duration += s.duration;
      if (!s.subtotal.empty()) subtotal = s.subtotal;
    }
    BudgetRow row;
    row.step = seq[i].label.empty() ? std::string(to_string(seq[i].kind)) : seq[i].label;
    row.duration = duration;
    row.step_error = step_infidelity(row_steps, ideal_in, ctx);
    row.fidelity = run[j].fidelity;
    row.kept = run[j].kept;
    rows.push_back(row);
    section_duration += duration;
    if (!subtotal.empty()) {
      BudgetRow sum;
      sum.step = subtotal;
      sum.duration = section_duration;
      sum.step_error = 1.0 - row.fidelity;
      sum.fidelity = row.fidelity;
      sum.kept = row.kept;
      sum.summary = true;
      rows.push_back(sum);
      section_duration = 0.0;
    }
    ideal_in = run[j].ideal;
  }
  return rows;
}

}  // namespace ca43
