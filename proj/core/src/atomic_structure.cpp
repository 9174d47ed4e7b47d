#include "ca43/atomic_structure.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ca43/errors.hpp"

namespace ca43 {

namespace {

struct SpinOperators {
  Eigen::MatrixXd z, plus, minus;
};

// Operators of a single spin with doubled quantum number two_j, basis m = +j ... -j.
SpinOperators spin_operators(int two_j) {
  const int dim = two_j + 1;
  SpinOperators ops{Eigen::MatrixXd::Zero(dim, dim), Eigen::MatrixXd::Zero(dim, dim),
                    Eigen::MatrixXd::Zero(dim, dim)};
  const double j = 0.5 * two_j;
  for (int k = 0; k < dim; ++k) {
    const double m = j - k;
    ops.z(k, k) = m;
    if (k > 0) ops.plus(k - 1, k) = std::sqrt(j * (j + 1.0) - m * (m + 1.0));
  }
  ops.minus = ops.plus.transpose();
  return ops;
}

Eigen::MatrixXd kron(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

int two_i(const IonSpecies& s) { return static_cast<int>(std::lround(2.0 * s.nuclear_spin)); }

Eigen::MatrixXd i_dot_j(const IonSpecies& species, Manifold m) {
  const auto nuc = spin_operators(two_i(species));
  const auto el = spin_operators(two_j(m));
  return kron(nuc.z, el.z) + 0.5 * (kron(nuc.plus, el.minus) + kron(nuc.minus, el.plus));
}

}  // namespace

std::string_view to_string(Manifold m) { return m == Manifold::S12 ? "S12" : "D52"; }

Manifold parse_manifold(std::string_view text) {
  if (text == "S12" || text == "S" || text == "s12") return Manifold::S12;
  if (text == "D52" || text == "D" || text == "d52") return Manifold::D52;
  throw ConfigError("unknown manifold '" + std::string(text) + "' (expected S12 or D52)");
}

int two_j(Manifold m) {
  switch (m) {
    case Manifold::S12: return 1;
    case Manifold::D52: return 5;
  }
  throw ConfigError("unknown manifold");
}

int manifold_dimension(const IonSpecies& species, Manifold m) { return (two_i(species) + 1) * (two_j(m) + 1); }

std::string LevelLabel::str() const {
  return std::string(manifold == Manifold::S12 ? "S" : "D") + "(" + std::to_string(F) + "," + std::to_string(mF) + ")";
}

ProductBasis product_basis(const IonSpecies& species, Manifold m) {
  ProductBasis basis;
  for (int tmi = two_i(species); tmi >= -two_i(species); tmi -= 2)
    for (int tmj = two_j(m); tmj >= -two_j(m); tmj -= 2) {
      basis.two_mI.push_back(tmi);
      basis.two_mJ.push_back(tmj);
    }
  return basis;
}

Eigen::MatrixXd hyperfine_operator(const IonSpecies& species, Manifold m) {
  const double I = species.nuclear_spin;
  const double J = 0.5 * two_j(m);
  const Eigen::MatrixXd ij = i_dot_j(species, m);
  const double a = m == Manifold::S12 ? species.A_S : species.A_D;
  Eigen::MatrixXd h = a * ij;
  if (m == Manifold::D52 && I > 0.5) {
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(ij.rows(), ij.cols());
    const double denom = 2.0 * I * (2.0 * I - 1.0) * J * (2.0 * J - 1.0);
    h += species.B_D * (3.0 * ij * ij + 1.5 * ij - I * (I + 1.0) * J * (J + 1.0) * id) / denom;
  }
  return h;
}

Eigen::MatrixXd zeeman_operator(const IonSpecies& species, Manifold m) {
  const auto nuc = spin_operators(two_i(species));
  const auto el = spin_operators(two_j(m));
  const Eigen::MatrixXd id_i = Eigen::MatrixXd::Identity(nuc.z.rows(), nuc.z.cols());
  const Eigen::MatrixXd id_j = Eigen::MatrixXd::Identity(el.z.rows(), el.z.cols());
  const double g_j = m == Manifold::S12 ? species.g_J_ground : species.g_J_D;
  return kBohrMagnetonMHzPerGauss * (g_j * kron(id_i, el.z) + species.g_I * kron(nuc.z, id_j));
}

Eigen::MatrixXd build_hamiltonian(const IonSpecies& species, Manifold m, double field_gauss) {
  if (m != Manifold::S12 && m != Manifold::D52) throw ConfigError("unknown manifold");
  return hyperfine_operator(species, m) + field_gauss * zeeman_operator(species, m);
}

// ---------------------------------------------------------------------------
// ZeemanTracker

ZeemanTracker::ZeemanTracker(const IonSpecies& species, Manifold m, double step_gauss)
    : species_(species), manifold_(m), step_(step_gauss), zeeman_(zeeman_operator(species, m)) {
  if (step_ <= 0.0) throw UsageError("tracking step must be positive");
  const ProductBasis basis = product_basis(species, m);
  const Eigen::MatrixXd hf = hyperfine_operator(species, m);
  const Eigen::MatrixXd ij = i_dot_j(species, m);
  const double I = species.nuclear_spin;
  const double J = 0.5 * two_j(m);

  std::map<int, std::vector<int>> by_mf;
  for (int k = 0; k < basis.size(); ++k) by_mf[basis.two_mF(k)].push_back(k);

  for (auto& [two_mf, idx] : by_mf) {
    Block block;
    block.two_mF = two_mf;
    block.indices = idx;
    const int n = static_cast<int>(idx.size());
    block.hf.resize(n, n);
    block.zee.resize(n, n);
    Eigen::MatrixXd ij_block(n, n);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) {
        block.hf(r, c) = hf(idx[r], idx[c]);
        block.zee(r, c) = zeeman_(idx[r], idx[c]);
        ij_block(r, c) = ij(idx[r], idx[c]);
      }
    // Zero-field eigenvectors are I.J eigenvectors; read F from <I.J>.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(ij_block);
    std::vector<std::pair<int, int>> f_and_col;
    for (int c = 0; c < n; ++c) {
      const double f2 = I * (I + 1.0) + J * (J + 1.0) + 2.0 * solver.eigenvalues()(c);
      const double f = 0.5 * (-1.0 + std::sqrt(1.0 + 4.0 * f2));
      const int f_int = static_cast<int>(std::lround(f));
      if (std::abs(f - f_int) > 1e-6) throw ConfigError("zero-field eigenvector without integer F");
      f_and_col.emplace_back(f_int, c);
    }
    std::sort(f_and_col.begin(), f_and_col.end());
    Eigen::MatrixXd v0(n, n);
    for (int c = 0; c < n; ++c) {
      block.F.push_back(f_and_col[c].first);
      v0.col(c) = solver.eigenvectors().col(f_and_col[c].second);
      // Deterministic sign: largest component positive.
      Eigen::Index arg = 0;
      v0.col(c).cwiseAbs().maxCoeff(&arg);
      if (v0(arg, c) < 0) v0.col(c) = -v0.col(c);
    }
    block.checkpoints.emplace(0, std::move(v0));
    blocks_.push_back(std::move(block));
  }
}

Eigen::MatrixXd ZeemanTracker::track_step(const Block& block, const Eigen::MatrixXd& previous, double field,
                                          Eigen::VectorXd& energies) {
  const Eigen::MatrixXd h = block.hf + field * block.zee;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h);
  const Eigen::MatrixXd& v = solver.eigenvectors();
  const Eigen::MatrixXd overlap = (previous.transpose() * v).cwiseAbs();
  const int n = static_cast<int>(previous.cols());
  std::vector<int> assigned(n, -1);
  std::vector<bool> taken(n, false);
  // Greedy assignment on the globally largest overlaps first.
  std::vector<std::tuple<double, int, int>> candidates;
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) candidates.emplace_back(overlap(r, c), r, c);
  std::sort(candidates.begin(), candidates.end(), [](auto& x, auto& y) { return std::get<0>(x) > std::get<0>(y); });
  for (auto& [ov, r, c] : candidates) {
    if (assigned[r] >= 0 || taken[c]) continue;
    assigned[r] = c;
    taken[c] = true;
    min_overlap_ = std::min(min_overlap_, ov);
  }
  Eigen::MatrixXd tracked(n, n);
  energies.resize(n);
  for (int r = 0; r < n; ++r) {
    Eigen::VectorXd col = v.col(assigned[r]);
    if (col.dot(previous.col(r)) < 0) col = -col;
    tracked.col(r) = col;
    energies(r) = solver.eigenvalues()(assigned[r]);
  }
  return tracked;
}

const Eigen::MatrixXd& ZeemanTracker::checkpoint(Block& block, long step) {
  auto it = block.checkpoints.find(step);
  if (it != block.checkpoints.end()) return it->second;
  const long towards_zero = step > 0 ? step - 1 : step + 1;
  const Eigen::MatrixXd previous = checkpoint(block, towards_zero);
  Eigen::VectorXd energies;
  Eigen::MatrixXd tracked = previous;
  // Walk in ten sub-steps; checkpoints stay 0.1 G apart but the overlap test
  // then sees at most one tenth of the change.
  const int substeps = 10;
  for (int k = 1; k <= substeps; ++k) {
    const double field = step_ * (towards_zero + (step - towards_zero) * static_cast<double>(k) / substeps);
    tracked = track_step(block, tracked, field, energies);
  }
  return block.checkpoints.emplace(step, std::move(tracked)).first->second;
}

std::vector<ZeemanLevel> ZeemanTracker::levels_at(double field_gauss) {
  const long step = static_cast<long>(std::trunc(field_gauss / step_));
  const int dim = static_cast<int>(zeeman_.rows());
  std::vector<ZeemanLevel> levels;
  levels.reserve(dim);
  for (auto& block : blocks_) {
    // Iterative build-up avoids deep recursion for large fields.
    const long dir = step >= 0 ? 1 : -1;
    for (long s = dir; dir * s < dir * step; s += dir) checkpoint(block, s);
    Eigen::MatrixXd v = checkpoint(block, step);
    Eigen::VectorXd energies;
    if (std::abs(field_gauss - step * step_) > 0.0) {
      v = track_step(block, v, field_gauss, energies);
    } else {
      const Eigen::MatrixXd h = block.hf + field_gauss * block.zee;
      energies = (v.transpose() * h * v).diagonal();
    }
    for (int c = 0; c < v.cols(); ++c) {
      ZeemanLevel level;
      level.manifold = manifold_;
      level.F = block.F[c];
      level.mF = block.two_mF / 2;
      level.energy = energies(c);
      level.field = field_gauss;
      level.eigenvector = Eigen::VectorXd::Zero(dim);
      for (int r = 0; r < v.rows(); ++r) level.eigenvector(block.indices[r]) = v(r, c);
      levels.push_back(std::move(level));
    }
  }
  std::stable_sort(levels.begin(), levels.end(), [](const ZeemanLevel& a, const ZeemanLevel& b) {
    if (a.mF != b.mF) return a.mF < b.mF;
    if (std::abs(a.energy - b.energy) > 1e-9) return a.energy < b.energy;
    return a.F < b.F;
  });
  return levels;
}

ZeemanLevel ZeemanTracker::level_at(const LevelLabel& label, double field_gauss) {
  if (label.manifold != manifold_) throw UsageError("label " + label.str() + " is not in this manifold");
  auto levels = levels_at(field_gauss);
  return find_level(levels, label);
}

std::vector<ZeemanLevel> eigenlevels(const IonSpecies& species, Manifold m, double field_gauss) {
  if (field_gauss < 0.0) throw UsageError("eigenlevels: field must be >= 0");
  ZeemanTracker tracker(species, m);
  return tracker.levels_at(field_gauss);
}

const ZeemanLevel& find_level(const std::vector<ZeemanLevel>& levels, const LevelLabel& label) {
  for (const auto& l : levels)
    if (l.label() == label) return l;
  throw UsageError("no level " + label.str() + " in level list");
}

// ---------------------------------------------------------------------------

double breit_rabi_energy(const IonSpecies& species, int F, int mF, double field_gauss) {
  const double I = species.nuclear_spin;
  const int f_upper = static_cast<int>(std::lround(I + 0.5));
  const int f_lower = static_cast<int>(std::lround(I - 0.5));
  if (F != f_upper && F != f_lower) throw UsageError("breit_rabi_energy: F must be I +- 1/2");
  if (std::abs(mF) > F) throw UsageError("breit_rabi_energy: |mF| > F");

  const double mu_b = kBohrMagnetonMHzPerGauss;
  const double delta_e = species.A_S * (I + 0.5);  // signed: negative for an inverted structure
  const double x = (species.g_J_ground - species.g_I) * mu_b * field_gauss / delta_e;
  const double base = -delta_e / (2.0 * (2.0 * I + 1.0)) + species.g_I * mu_b * mF * field_gauss;
  if (std::abs(mF) == f_upper) {
    const double branch = mF > 0 ? 1.0 + x : 1.0 - x;
    return base + 0.5 * delta_e * branch;
  }
  const double root = std::sqrt(1.0 + 4.0 * mF * x / (2.0 * I + 1.0) + x * x);
  return base + (F == f_upper ? 0.5 : -0.5) * delta_e * root;
}

double transition_frequency(const ZeemanLevel& a, const ZeemanLevel& b) {
  if (a.field != b.field) throw UsageError("transition_frequency: levels computed at different fields");
  return b.energy - a.energy;
}

namespace {

double expectation(const Eigen::MatrixXd& op, const Eigen::VectorXd& v) { return v.dot(op * v); }

}  // namespace

double level_sensitivity(const IonSpecies& species, const LevelLabel& level, double field_gauss) {
  ZeemanTracker tracker(species, level.manifold);
  const ZeemanLevel l = tracker.level_at(level, field_gauss);
  return expectation(tracker.zeeman(), l.eigenvector);
}

FieldSensitivity field_sensitivity(const IonSpecies& species, const LevelLabel& a, const LevelLabel& b,
                                   double field_gauss) {
  constexpr double h = 1e-3;
  ZeemanTracker ta(species, a.manifold);
  ZeemanTracker tb_own(species, b.manifold);
  ZeemanTracker& tb = (a.manifold == b.manifold) ? ta : tb_own;

  FieldSensitivity out;
  const ZeemanLevel la = ta.level_at(a, field_gauss);
  const ZeemanLevel lb = tb.level_at(b, field_gauss);
  out.hellmann_feynman = expectation(tb.zeeman(), lb.eigenvector) - expectation(ta.zeeman(), la.eigenvector);

  auto freq = [&](double field) { return tb.level_at(b, field).energy - ta.level_at(a, field).energy; };
  out.finite_difference = (freq(field_gauss + h) - freq(field_gauss - h)) / (2.0 * h);

  const double scale = std::max(std::abs(out.hellmann_feynman), std::abs(out.finite_difference));
  const bool disagree = scale > 1e-6 && std::abs(out.hellmann_feynman - out.finite_difference) > 1e-3 * scale;
  out.degenerate_warning = disagree || std::min(ta.min_overlap(), tb.min_overlap()) < 0.9;
  return out;
}

std::optional<double> find_insensitive_field(const IonSpecies& species, const LevelLabel& a, const LevelLabel& b,
                                             double lo_gauss, double hi_gauss) {
  if (!(hi_gauss > lo_gauss) || lo_gauss < 0.0) throw UsageError("find_insensitive_field: need 0 <= lo < hi");
  ZeemanTracker ta(species, a.manifold);
  ZeemanTracker tb_own(species, b.manifold);
  ZeemanTracker& tb = (a.manifold == b.manifold) ? ta : tb_own;
  auto sens = [&](double field) {
    const auto la = ta.level_at(a, field);
    const auto lb = tb.level_at(b, field);
    return expectation(tb.zeeman(), lb.eigenvector) - expectation(ta.zeeman(), la.eigenvector);
  };

  const int points = std::max(2, static_cast<int>(std::ceil((hi_gauss - lo_gauss) / 0.5))) + 1;
  double prev_b = lo_gauss;
  double prev_s = sens(prev_b);
  for (int k = 1; k < points; ++k) {
    const double field = lo_gauss + (hi_gauss - lo_gauss) * k / (points - 1);
    const double s = sens(field);
    if (prev_s * s < 0.0) {
      double lo = prev_b, hi = field, s_lo = prev_s;
      while (hi - lo > 1e-3) {
        const double mid = 0.5 * (lo + hi);
        const double s_mid = sens(mid);
        if (s_mid == 0.0) return mid;
        if ((s_mid < 0.0) == (s_lo < 0.0)) {
          lo = mid;
          s_lo = s_mid;
        } else {
          hi = mid;
        }
      }
      return 0.5 * (lo + hi);
    }
    prev_b = field;
    prev_s = s;
  }
  return std::nullopt;
}

NamedQubit optical_qubit() { return {"optical", named::down, named::upsilon, QubitKind::optical}; }
NamedQubit optical_qubit_prime() { return {"optical_prime", named::down, named::upsilon_prime, QubitKind::optical}; }
NamedQubit hyperfine_qubit() { return {"hyperfine", named::down, named::up, QubitKind::hyperfine}; }

}  // namespace ca43
