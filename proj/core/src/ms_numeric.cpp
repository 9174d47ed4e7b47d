#include "ca43/ms_numeric.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/Sparse>
#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <unsupported/Eigen/KroneckerProduct>

#include "ca43/errors.hpp"

namespace ca43 {

namespace {

using Sparse = Eigen::SparseMatrix<cplx>;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Term {
  double omega;  // rad/us, term carries e^{-i omega t}
  Sparse op;
  Sparse op_dag;
};

class TimeDependentHamiltonian {
 public:
  TimeDependentHamiltonian(int dim) : dim_(dim), static_(dim, dim) {}

  void add(double omega, const Sparse& op) {
    // Merge terms of equal frequency to keep the matvec count low.
    for (auto& t : terms_)
      if (std::abs(t.omega - omega) < 1e-12) {
        t.op += op;
        t.op_dag = Sparse(t.op.adjoint());
        return;
      }
    terms_.push_back({omega, op, Sparse(op.adjoint())});
  }
  void add_static(const Sparse& op) { static_ += op; }

  void apply(double t, const Eigen::VectorXcd& psi, Eigen::VectorXcd& out) const {
    // out = -i H(t) psi
    out = static_ * psi;
    for (const auto& term : terms_) {
      const cplx ph = std::polar(1.0, -term.omega * t);
      out += ph * (term.op * psi) + std::conj(ph) * (term.op_dag * psi);
    }
    out *= cplx(0.0, -1.0);
  }

  double max_frequency() const {
    double f = 0.0;
    for (const auto& t : terms_) f = std::max(f, std::abs(t.omega));
    for (int k = 0; k < static_.outerSize(); ++k)
      for (Sparse::InnerIterator it(static_, k); it; ++it) f = std::max(f, std::abs(it.value()));
    return f;
  }

  double norm_bound() const {
    auto bound = [](const Sparse& s) {
      Eigen::VectorXd rows = Eigen::VectorXd::Zero(s.rows()), cols = Eigen::VectorXd::Zero(s.cols());
      for (int k = 0; k < s.outerSize(); ++k)
        for (Sparse::InnerIterator it(s, k); it; ++it) {
          rows(it.row()) += std::abs(it.value());
          cols(it.col()) += std::abs(it.value());
        }
      const double r = rows.size() ? rows.maxCoeff() : 0.0;
      const double c = cols.size() ? cols.maxCoeff() : 0.0;
      return std::sqrt(r * c);
    };
    double n = bound(static_);
    for (const auto& t : terms_) n += 2.0 * bound(t.op);
    return n;
  }

  int dim() const { return dim_; }

 private:
  int dim_;
  Sparse static_;
  std::vector<Term> terms_;
};

Sparse local_op(int d, int row, int col) {
  Sparse s(d, d);
  s.insert(row, col) = 1.0;
  return s;
}

Sparse identity(int d) {
  Sparse s(d, d);
  s.setIdentity();
  return s;
}

// Sum over both ions of op_local, tensored with a motional operator.
Sparse collective(const Sparse& op_local, const Sparse& motion) {
  const int d = static_cast<int>(op_local.rows());
  const Sparse id = identity(d);
  const Sparse pair = Sparse(Eigen::kroneckerProduct(op_local, id)) + Sparse(Eigen::kroneckerProduct(id, op_local));
  return Sparse(Eigen::kroneckerProduct(pair, motion));
}

}  // namespace

MsNumericResult ms_numeric(const BichromaticPulse& pulse, const MotionalMode& mode, const JointState& initial,
                           const MsNumericOptions& options) {
  mode.validate();
  const int d = initial.local_dim();
  const int nf = initial.fock_dim();
  const int dim = initial.dim();
  const QubitIndices q = pulse.index;
  if (q.lower >= d || q.upper >= d) throw UsageError("ms_numeric: qubit index outside local dimension");

  // Motional operators.
  Sparse a(nf, nf);
  for (int n = 1; n < nf; ++n) a.insert(n - 1, n) = std::sqrt(static_cast<double>(n));
  const Sparse adag = Sparse(a.adjoint());
  const Sparse id_m = identity(nf);

  // Frame energies of the local levels (rad/us).
  std::vector<std::optional<double>> energy(d);
  energy[q.lower] = 0.0;
  energy[q.upper] = kTwoPi * pulse.static_shift * 1e-3;
  for (int pass = 0; pass < static_cast<int>(options.spectators.size()) + 1; ++pass)
    for (const auto& s : options.spectators) {
      if (s.lower >= d || s.upper >= d || s.lower < 0 || s.upper < 0)
        throw UsageError("ms_numeric: spectator level outside local dimension");
      const double f = kTwoPi * s.offset;
      if (energy[s.lower] && !energy[s.upper] && s.upper != q.upper) energy[s.upper] = *energy[s.lower] + f;
      if (energy[s.upper] && !energy[s.lower] && s.lower != q.lower) energy[s.lower] = *energy[s.upper] - f;
    }
  for (const auto& s : options.spectators)
    if (!energy[s.lower] || !energy[s.upper]) throw UsageError("ms_numeric: spectator not connected to the qubit");

  TimeDependentHamiltonian h(dim);
  {
    Sparse diag(d, d);
    for (int l = 0; l < d; ++l)
      if (energy[l] && *energy[l] != 0.0) diag.insert(l, l) = *energy[l];
    h.add_static(collective(diag, id_m));
  }

  const double nu = kTwoPi * mode.frequency;
  const double delta = kTwoPi * pulse.detuning_delta * 1e-3;
  const double eta = mode.lamb_dicke_eta;
  const cplx i(0.0, 1.0);
  struct Tone {
    double detuning;
    double omega;
  };
  const Tone tones[2] = {{nu + delta, kTwoPi * pulse.omega_blue * pulse.coupling_scale * 1e-3},
                         {-(nu + delta), kTwoPi * pulse.omega_red * pulse.coupling_scale * 1e-3}};
  const double tone_phase = pulse.phase - 0.5 * std::numbers::pi;

  auto add_line = [&](int lower, int upper, double rel, bool is_qubit) {
    const Sparse raise = local_op(d, upper, lower);
    for (int k = 0; k < 2; ++k) {
      const Tone& t = tones[k];
      if (t.omega == 0.0 || rel == 0.0) continue;
      const cplx c = 0.5 * t.omega * rel * std::exp(i * tone_phase);
      const bool blue = k == 0;
      // Resonant sideband of the qubit line for this tone.
      const bool keep_all = options.offresonant_terms || !is_qubit;
      if (keep_all) h.add(t.detuning, c * collective(raise, id_m));
      if (nf > 1) {
        // i eta a e^{-i nu t}: total frequency detuning + nu ; i eta a^dag e^{+i nu t}: detuning - nu
        const Sparse with_a = collective(raise, a);
        const Sparse with_adag = collective(raise, adag);
        const bool a_resonant = !blue;     // red tone + a
        const bool adag_resonant = blue;   // blue tone + a^dag
        if (keep_all || a_resonant) h.add(t.detuning + nu, (c * i * eta) * with_a);
        if (keep_all || adag_resonant) h.add(t.detuning - nu, (c * i * eta) * with_adag);
      }
    }
  };
  add_line(q.lower, q.upper, 1.0, true);
  for (const auto& s : options.spectators) add_line(s.lower, s.upper, s.relative_rabi, false);

  // Step size.
  const double f_max = h.max_frequency();
  const double h_norm = h.norm_bound();
  double dt = pulse.duration;
  if (f_max > 0.0) dt = std::min(dt, kTwoPi / (options.steps_per_period * f_max));
  if (h_norm > 0.0) dt = std::min(dt, options.max_phase_per_step / h_norm);
  const int steps = pulse.duration > 0.0 ? static_cast<int>(std::ceil(pulse.duration / dt)) : 0;
  dt = steps > 0 ? pulse.duration / steps : 0.0;

  // Ensemble decomposition of the input.
  std::vector<std::pair<double, Eigen::VectorXcd>> ensemble;
  const auto& rho = initial.rho();
  const bool diagonal = (rho - Eigen::MatrixXcd(rho.diagonal().asDiagonal())).cwiseAbs().maxCoeff() < 1e-15;
  if (diagonal) {
    for (int k = 0; k < dim; ++k) {
      const double w = rho(k, k).real();
      if (w > 1e-14) ensemble.emplace_back(w, Eigen::VectorXcd::Unit(dim, k));
    }
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(rho);
    for (int k = 0; k < dim; ++k) {
      const double w = solver.eigenvalues()(k);
      if (w > 1e-14) ensemble.emplace_back(w, solver.eigenvectors().col(k));
    }
  }

  MsNumericResult result{JointState(d, nf)};
  result.steps = steps;
  result.time_step = dt;
  auto top_population = [&](const Eigen::VectorXcd& psi) {
    if (nf < 3) return 0.0;
    double p = 0.0;
    for (int pair = 0; pair < d * d; ++pair)
      p += std::norm(psi(pair * nf + nf - 1)) + std::norm(psi(pair * nf + nf - 2));
    return p;
  };

  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(dim, dim);
  Eigen::VectorXcd k1(dim), k2(dim), k3(dim), k4(dim), tmp(dim);
  double top_bound = 0.0;
  for (auto& [w, psi] : ensemble) {
    double vector_top = top_population(psi);
    for (int s = 0; s < steps; ++s) {
      const double t = s * dt;
      h.apply(t, psi, k1);
      tmp = psi + 0.5 * dt * k1;
      h.apply(t + 0.5 * dt, tmp, k2);
      tmp = psi + 0.5 * dt * k2;
      h.apply(t + 0.5 * dt, tmp, k3);
      tmp = psi + dt * k3;
      h.apply(t + dt, tmp, k4);
      psi += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      if ((s + 1) % options.truncation_check_interval == 0 || s + 1 == steps)
        vector_top = std::max(vector_top, top_population(psi));
    }
    // Upper bound on the ensemble's top-two population at any time.
    top_bound += w * vector_top;
    if (top_bound > 1e-8)
      throw TruncationError("Fock truncation n_max = " + std::to_string(nf - 1) +
                            " too small (top-two population above " + std::to_string(top_bound) +
                            "); increase n_max");
    result.max_norm_error = std::max(result.max_norm_error, std::abs(psi.norm() - 1.0));
    out.noalias() += w * psi * psi.adjoint();
  }
  result.max_top_population = top_bound;
  result.state.rho() = std::move(out);
  return result;
}

JointState ms_numeric_bell(const BichromaticPulse& pulse, const MotionalMode& mode, int local_dim, int l1, int l2,
                           const MsNumericOptions& options) {
  const auto in = JointState::thermal(local_dim, l1, l2, mode);
  return ms_numeric(pulse, mode, in, options).state.traced();
}

}  // namespace ca43
