#include "ca43/joint_state.hpp"

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/KroneckerProduct>
#include <cmath>
#include <numbers>

#include "ca43/errors.hpp"

namespace ca43 {

namespace {
constexpr double kHbar = 1.054571817e-34;
constexpr double kAmu = 1.66053906660e-27;
}  // namespace

void MotionalMode::validate() const {
  if (!(lamb_dicke_eta > 0.0 && lamb_dicke_eta < 0.3))
    throw ConfigError("Lamb-Dicke parameter must lie in (0, 0.3)");
  if (!(nbar >= 0.0)) throw ConfigError("nbar must be >= 0");
  if (n_max < 0) throw ConfigError("n_max must be >= 0");
  if (!(frequency > 0.0)) throw ConfigError("mode frequency must be positive");
}

double MotionalMode::truncated_tail() const {
  if (nbar == 0.0) return 0.0;
  const double q = nbar / (nbar + 1.0);
  return std::pow(q, n_max + 1);
}

std::vector<double> MotionalMode::thermal_weights() const {
  if (truncated_tail() > 1e-8)
    throw TruncationError("thermal tail beyond n_max = " + std::to_string(n_max) + " is " +
                          std::to_string(truncated_tail()) + "; increase n_max");
  std::vector<double> w(n_max + 1, 0.0);
  if (nbar == 0.0) {
    w[0] = 1.0;
    return w;
  }
  const double q = nbar / (nbar + 1.0);
  double sum = 0.0;
  for (int n = 0; n <= n_max; ++n) sum += (w[n] = std::pow(q, n) / (nbar + 1.0));
  for (auto& x : w) x /= sum;
  return w;
}

double lamb_dicke_single(double wavelength_nm, double mass_amu, double frequency_mhz, double angle_to_axis) {
  const double k = 2.0 * std::numbers::pi / (wavelength_nm * 1e-9);
  const double omega = 2.0 * std::numbers::pi * frequency_mhz * 1e6;
  return k * std::cos(angle_to_axis) * std::sqrt(kHbar / (2.0 * mass_amu * kAmu * omega));
}

double lamb_dicke_com(double wavelength_nm, double mass_amu, double com_frequency_mhz, double angle_to_axis) {
  return lamb_dicke_single(wavelength_nm, mass_amu, com_frequency_mhz, angle_to_axis) / std::sqrt(2.0);
}

double lamb_dicke_stretch(double wavelength_nm, double mass_amu, double com_frequency_mhz, double angle_to_axis) {
  return lamb_dicke_single(wavelength_nm, mass_amu, std::sqrt(3.0) * com_frequency_mhz, angle_to_axis) /
         std::sqrt(2.0);
}

double debye_waller_factor(double eta, double nbar) { return std::exp(-eta * eta * (nbar + 0.5)); }

JointState::JointState(int local_dim, int fock_dim) : local_dim_(local_dim), fock_dim_(fock_dim) {
  if (local_dim < 2 || fock_dim < 1) throw UsageError("JointState: need local_dim >= 2 and fock_dim >= 1");
  rho_ = Eigen::MatrixXcd::Zero(dim(), dim());
}

JointState JointState::product(int local_dim, int l1, int l2) {
  JointState s(local_dim, 1);
  if (l1 < 0 || l2 < 0 || l1 >= local_dim || l2 >= local_dim) throw UsageError("JointState: level out of range");
  s.rho_(s.index(l1, l2), s.index(l1, l2)) = 1.0;
  return s;
}

JointState JointState::thermal(int local_dim, int l1, int l2, const MotionalMode& mode) {
  const auto w = mode.thermal_weights();
  JointState s(local_dim, mode.n_max + 1);
  if (l1 < 0 || l2 < 0 || l1 >= local_dim || l2 >= local_dim) throw UsageError("JointState: level out of range");
  for (int n = 0; n <= mode.n_max; ++n) s.rho_(s.index(l1, l2, n), s.index(l1, l2, n)) = w[n];
  return s;
}

JointState JointState::from_vector(int local_dim, int fock_dim, const Eigen::VectorXcd& psi) {
  JointState s(local_dim, fock_dim);
  if (psi.size() != s.dim()) throw UsageError("JointState: vector dimension mismatch");
  s.rho_ = psi * psi.adjoint();
  return s;
}

JointState JointState::from_matrix(int local_dim, int fock_dim, Eigen::MatrixXcd rho) {
  JointState s(local_dim, fock_dim);
  if (rho.rows() != s.dim() || rho.cols() != s.dim()) throw UsageError("JointState: matrix dimension mismatch");
  s.rho_ = std::move(rho);
  return s;
}

Eigen::MatrixXcd JointState::reduced() const {
  if (fock_dim_ == 1) return rho_;
  const int p = pair_dim();
  Eigen::MatrixXcd r = Eigen::MatrixXcd::Zero(p, p);
  for (int a = 0; a < p; ++a)
    for (int b = 0; b < p; ++b) {
      cplx sum = 0.0;
      for (int n = 0; n < fock_dim_; ++n) sum += rho_(a * fock_dim_ + n, b * fock_dim_ + n);
      r(a, b) = sum;
    }
  return r;
}

JointState JointState::traced() const { return from_matrix(local_dim_, 1, reduced()); }

double JointState::population(int l1, int l2) const {
  double sum = 0.0;
  for (int n = 0; n < fock_dim_; ++n) sum += rho_(index(l1, l2, n), index(l1, l2, n)).real();
  return sum;
}

double JointState::ion_population(int which, int level) const {
  double sum = 0.0;
  for (int other = 0; other < local_dim_; ++other)
    sum += which == 0 ? population(level, other) : population(other, level);
  return sum;
}

double JointState::purity() const { return (rho_ * rho_).trace().real(); }

void JointState::validate() const {
  const double tr = rho_.trace().real();
  if (std::abs(tr - 1.0) > 1e-9) throw UsageError("JointState: trace " + std::to_string(tr) + " != 1");
  if ((rho_ - rho_.adjoint()).cwiseAbs().maxCoeff() > 1e-12) throw UsageError("JointState: rho not Hermitian");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(rho_, Eigen::EigenvaluesOnly);
  if (solver.eigenvalues().minCoeff() < -1e-10) throw UsageError("JointState: rho has a negative eigenvalue");
}

Eigen::MatrixXcd both_ions(const Eigen::MatrixXcd& u) { return Eigen::kroneckerProduct(u, u); }

Eigen::MatrixXcd one_ion(const Eigen::MatrixXcd& u, int which) {
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(u.rows(), u.cols());
  return which == 0 ? Eigen::MatrixXcd(Eigen::kroneckerProduct(u, id)) : Eigen::MatrixXcd(Eigen::kroneckerProduct(id, u));
}

void apply_pair_unitary(JointState& state, const Eigen::MatrixXcd& v) {
  if (v.rows() != state.pair_dim()) throw UsageError("apply_pair_unitary: dimension mismatch");
  const int nf = state.fock_dim();
  if (nf == 1) {
    state.rho() = v * state.rho() * v.adjoint();
    return;
  }
  // V x 1_motion without forming the Kronecker product.
  const int p = state.pair_dim();
  Eigen::MatrixXcd tmp = Eigen::MatrixXcd::Zero(state.dim(), state.dim());
  const auto& rho = state.rho();
  for (int a = 0; a < p; ++a)
    for (int b = 0; b < p; ++b) {
      if (v(a, b) == 0.0) continue;
      tmp.middleRows(a * nf, nf) += v(a, b) * rho.middleRows(b * nf, nf);
    }
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(state.dim(), state.dim());
  for (int a = 0; a < p; ++a)
    for (int b = 0; b < p; ++b) {
      if (v(a, b) == 0.0) continue;
      out.middleCols(a * nf, nf) += std::conj(v(a, b)) * tmp.middleCols(b * nf, nf);
    }
  state.rho() = std::move(out);
}

}  // namespace ca43
