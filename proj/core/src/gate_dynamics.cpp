#include "ca43/gate_dynamics.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "ca43/errors.hpp"

namespace ca43 {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void check_indices(int local_dim, QubitIndices q) {
  if (q.lower < 0 || q.upper < 0 || q.lower >= local_dim || q.upper >= local_dim || q.lower == q.upper)
    throw UsageError("qubit indices out of range for local dimension " + std::to_string(local_dim));
}

}  // namespace

bool BichromaticPulse::closed_loop(double tolerance) const {
  const double loops = detuning_delta * duration * 1e-3;
  return std::abs(loops - std::round(loops)) <= tolerance && std::round(loops) >= 1.0;
}

BichromaticPulse maximally_entangling_pulse(const MotionalMode& mode, double delta_khz) {
  mode.validate();
  if (!(delta_khz > 0.0)) throw UsageError("detuning must be positive");
  BichromaticPulse p;
  p.detuning_delta = delta_khz;
  p.duration = 1e3 / delta_khz;
  p.omega_red = p.omega_blue = delta_khz / (2.0 * mode.lamb_dicke_eta);
  return p;
}

Eigen::MatrixXcd rotation(int local_dim, QubitIndices q, double theta, double phase) {
  check_indices(local_dim, q);
  Eigen::MatrixXcd r = Eigen::MatrixXcd::Identity(local_dim, local_dim);
  const double c = std::cos(0.5 * theta), s = std::sin(0.5 * theta);
  const cplx i(0.0, 1.0);
  r(q.lower, q.lower) = c;
  r(q.upper, q.upper) = c;
  r(q.lower, q.upper) = -i * s * std::exp(-i * phase);
  r(q.upper, q.lower) = -i * s * std::exp(i * phase);
  return r;
}

JointState carrier_pulse(const JointState& state, QubitIndices q, double theta, double phase) {
  if (theta < 0.0 || theta > 4.0 * std::numbers::pi)
    warn("carrier pulse area " + std::to_string(theta) + " rad outside [0, 4 pi]");
  JointState out = state;
  apply_pair_unitary(out, both_ions(rotation(state.local_dim(), q, theta, phase)));
  return out;
}

Eigen::MatrixXcd collective_sigma(int local_dim, QubitIndices q, double phase) {
  check_indices(local_dim, q);
  Eigen::MatrixXcd s = Eigen::MatrixXcd::Zero(local_dim, local_dim);
  const cplx i(0.0, 1.0);
  s(q.lower, q.upper) = std::exp(-i * phase);
  s(q.upper, q.lower) = std::exp(i * phase);
  return one_ion(s, 0) + one_ion(s, 1);
}

namespace {

struct Eigenbasis {
  Eigen::MatrixXcd vectors;
  Eigen::VectorXd values;
};

Eigenbasis sigma_eigenbasis(int local_dim, QubitIndices q, double phase) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(collective_sigma(local_dim, q, phase));
  Eigenbasis e{solver.eigenvectors(), solver.eigenvalues()};
  for (Eigen::Index k = 0; k < e.values.size(); ++k) e.values(k) = std::round(e.values(k));
  return e;
}

}  // namespace

double MsChannel::thermal_phase_variance() const { return 2.0 * std::norm(alpha) * (nbar + 0.5); }

double MsChannel::chi() const { return 2.0 * phase + std::numbers::pi; }

JointState MsChannel::apply(const JointState& state) const {
  if (state.fock_dim() != 1) throw UsageError("MsChannel::apply expects a motion-traced state");
  const auto basis = sigma_eigenbasis(state.local_dim(), index, phase);
  const Eigen::MatrixXcd in_basis = basis.vectors.adjoint() * state.rho() * basis.vectors;
  const double c = std::norm(alpha) * (nbar + 0.5);
  Eigen::MatrixXcd out = in_basis;
  const cplx i(0.0, 1.0);
  for (Eigen::Index a = 0; a < out.rows(); ++a)
    for (Eigen::Index b = 0; b < out.cols(); ++b) {
      const double la = basis.values(a), lb = basis.values(b);
      out(a, b) *= std::exp(-i * phi * (la * la - lb * lb)) * std::exp(-c * (la - lb) * (la - lb));
    }
  JointState result = state;
  result.rho() = basis.vectors * out * basis.vectors.adjoint();
  return result;
}

Eigen::MatrixXcd MsChannel::unitary(int local_dim, double x) const {
  const auto basis = sigma_eigenbasis(local_dim, index, phase);
  const cplx i(0.0, 1.0);
  Eigen::VectorXcd d(basis.values.size());
  for (Eigen::Index k = 0; k < d.size(); ++k) {
    const double l = basis.values(k);
    d(k) = std::exp(-i * phi * l * l + i * x * l);
  }
  return basis.vectors * d.asDiagonal() * basis.vectors.adjoint();
}

MsChannel ms_analytic(const BichromaticPulse& pulse, const MotionalMode& mode) {
  mode.validate();
  const double omega = kTwoPi * pulse.mean_omega() * pulse.coupling_scale * 1e-3;  // rad/us
  const double delta = kTwoPi * pulse.detuning_delta * 1e-3;
  if (delta == 0.0) throw UsageError("ms_analytic: zero detuning is not a gate");
  const double t = pulse.duration;
  const double g = 0.5 * mode.lamb_dicke_eta * omega;
  const cplx i(0.0, 1.0);
  MsChannel ch;
  ch.alpha = (g / delta) * (std::exp(-i * delta * t) - 1.0);
  ch.phi = (g * g / delta) * (t - std::sin(delta * t) / delta);
  ch.nbar = mode.nbar;
  ch.phase = pulse.phase;
  ch.index = pulse.index;
  return ch;
}

Eigen::VectorXcd bell_state(int local_dim, QubitIndices q, double chi) {
  check_indices(local_dim, q);
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(local_dim * local_dim);
  const cplx i(0.0, 1.0);
  v(q.lower * local_dim + q.lower) = 1.0 / std::sqrt(2.0);
  v(q.upper * local_dim + q.upper) = i * std::exp(i * chi) / std::sqrt(2.0);
  return v;
}

double gate_fidelity(const JointState& state, const Eigen::VectorXcd& target, bool maximize_phase) {
  if (target.size() != state.pair_dim()) throw UsageError("gate_fidelity: dimension mismatch");
  if (std::abs(target.norm() - 1.0) > 1e-9) throw UsageError("gate_fidelity: target is not normalized");
  const Eigen::MatrixXcd rho = state.reduced();
  if (!maximize_phase) return std::clamp((target.adjoint() * rho * target)(0, 0).real(), 0.0, 1.0);
  std::vector<int> support;
  for (Eigen::Index k = 0; k < target.size(); ++k)
    if (std::abs(target(k)) > 1e-12) support.push_back(static_cast<int>(k));
  if (support.size() == 1) return rho(support[0], support[0]).real();
  if (support.size() != 2) throw UsageError("gate_fidelity: phase maximization needs a two-component target");
  const int x = support[0], y = support[1];
  const double ax = std::abs(target(x)), ay = std::abs(target(y));
  return ax * ax * rho(x, x).real() + ay * ay * rho(y, y).real() + 2.0 * ax * ay * std::abs(rho(x, y));
}

double gate_fidelity(const MsChannel& channel, int local_dim, double chi) {
  const auto in = JointState::product(local_dim, channel.index.lower, channel.index.lower);
  return gate_fidelity(channel.apply(in), bell_state(local_dim, channel.index, chi));
}

}  // namespace ca43
