#pragma once

// Two-ion internal state, optionally tensored with one motional mode.
//
// Ordered basis: ion 1 local level (outer) x ion 2 local level x Fock number
// (inner). The local level set is arbitrary; gate code addresses the qubit by
// two local indices. fock_dim == 1 is the motion-traced (reduced) state.

#include <Eigen/Dense>
#include <complex>
#include <vector>

namespace ca43 {

using cplx = std::complex<double>;

/// Local indices of the two qubit levels.
struct QubitIndices {
  int lower = 0;
  int upper = 1;
};

struct MotionalMode {
  double frequency = 1.2;      // MHz
  double lamb_dicke_eta = 0.0427;
  double nbar = 0.03;
  int n_max = 30;

  void validate() const;
  /// Thermal populations over [0, n_max], renormalized. Throws TruncationError
  /// when the discarded tail exceeds 1e-8.
  std::vector<double> thermal_weights() const;
  /// Thermal population beyond n_max before renormalization.
  double truncated_tail() const;
};

/// Single-ion Lamb-Dicke parameter k cos(angle) sqrt(hbar / (2 m w)).
double lamb_dicke_single(double wavelength_nm, double mass_amu, double frequency_mhz, double angle_to_axis);
/// Per-ion parameter of the axial centre-of-mass mode of a two-ion crystal.
double lamb_dicke_com(double wavelength_nm, double mass_amu, double com_frequency_mhz, double angle_to_axis);
/// Per-ion parameter of the axial stretch mode (frequency sqrt(3) x COM).
double lamb_dicke_stretch(double wavelength_nm, double mass_amu, double com_frequency_mhz, double angle_to_axis);
/// Thermal average of the carrier coupling reduction exp(-eta^2 (nbar + 1/2)).
double debye_waller_factor(double eta, double nbar);

class JointState {
 public:
  JointState(int local_dim, int fock_dim);

  /// |l1 l2> x thermal(mode) when mode is given, |l1 l2> alone otherwise.
  static JointState product(int local_dim, int l1, int l2);
  static JointState thermal(int local_dim, int l1, int l2, const MotionalMode& mode);
  static JointState from_vector(int local_dim, int fock_dim, const Eigen::VectorXcd& psi);
  static JointState from_matrix(int local_dim, int fock_dim, Eigen::MatrixXcd rho);

  int local_dim() const { return local_dim_; }
  int fock_dim() const { return fock_dim_; }
  int pair_dim() const { return local_dim_ * local_dim_; }
  int dim() const { return pair_dim() * fock_dim_; }
  int index(int l1, int l2, int n = 0) const { return (l1 * local_dim_ + l2) * fock_dim_ + n; }

  const Eigen::MatrixXcd& rho() const { return rho_; }
  Eigen::MatrixXcd& rho() { return rho_; }

  /// Partial trace over motion (pair_dim x pair_dim).
  Eigen::MatrixXcd reduced() const;
  JointState traced() const;
  double population(int l1, int l2) const;
  /// Probability that ion `which` (0 or 1) is in local level `level`.
  double ion_population(int which, int level) const;
  double purity() const;

  /// Throws UsageError unless trace = 1 (1e-9), Hermitian (1e-12) and PSD (-1e-10).
  void validate() const;

 private:
  int local_dim_;
  int fock_dim_;
  Eigen::MatrixXcd rho_;
};

/// U x U on the two ions (identity on motion) for a local_dim x local_dim U.
Eigen::MatrixXcd both_ions(const Eigen::MatrixXcd& u);
/// u acting on one ion (0 or 1), identity on the other.
Eigen::MatrixXcd one_ion(const Eigen::MatrixXcd& u, int which);
/// rho -> V rho V^dagger where V acts on the internal pair and the identity on motion.
void apply_pair_unitary(JointState& state, const Eigen::MatrixXcd& pair_unitary);

}  // namespace ca43
