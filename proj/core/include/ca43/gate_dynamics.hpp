#pragma once

// Carrier rotations and the Molmer-Sorensen gate.
//
// Units: detunings and Rabi frequencies are cyclic, in kHz; durations in us.
// Rotation convention on a qubit (lower = |0>, upper = |1>):
//   R(theta, phi) = cos(theta/2) 1 - i sin(theta/2) sigma_phi,
//   sigma_phi = e^{-i phi} |0><1| + e^{i phi} |1><0|.
// The MS gate generates exp(-i Phi S^2) with S = sigma_phi(1) + sigma_phi(2),
// so at Phi = pi/8 it maps |00> to (|00> + i e^{i chi}|11>)/sqrt2 with
// chi = 2 phi + pi.

#include <Eigen/Dense>
#include <complex>
#include <numbers>

#include "ca43/atomic_structure.hpp"
#include "ca43/joint_state.hpp"

namespace ca43 {

struct BichromaticPulse {
  double detuning_delta = 10.0;  // kHz from the motional sideband
  double duration = 100.0;       // us
  double omega_red = 0.0;        // kHz, carrier Rabi frequency of the red tone
  double omega_blue = 0.0;       // kHz
  double phase = std::numbers::pi / 2.0;  // rad, phi of sigma_phi
  double static_shift = 0.0;     // kHz, light shift of the qubit not produced by the two tones
  double coupling_scale = 1.0;   // Debye-Waller reduction from the spectator motional mode
  NamedQubit qubit = optical_qubit();
  QubitIndices index{};

  double mean_omega() const { return 0.5 * (omega_red + omega_blue); }
  /// |duration x detuning - loops| test for an integer number of loops.
  bool closed_loop(double tolerance = 1e-9) const;
};

/// Closed loop after one period and a pi/8 geometric phase: duration = 1/delta,
/// eta * Omega = delta / 2.
BichromaticPulse maximally_entangling_pulse(const MotionalMode& mode, double delta_khz = 10.0);

/// Local single-ion rotation (local_dim x local_dim) on two levels.
Eigen::MatrixXcd rotation(int local_dim, QubitIndices q, double theta, double phase);

/// Global rotation of both ions. Motion untouched. Warns when theta is outside [0, 4 pi].
JointState carrier_pulse(const JointState& state, QubitIndices q, double theta, double phase);

/// sigma_phi(1) + sigma_phi(2) on the pair space of the given local dimension.
Eigen::MatrixXcd collective_sigma(int local_dim, QubitIndices q, double phase);

/// Thermally averaged spin-dependent displacement channel.
struct MsChannel {
  cplx alpha;          // displacement per unit S eigenvalue at the end of the pulse
  double phi = 0.0;    // geometric phase coefficient of S^2
  double nbar = 0.0;
  double phase = 0.0;  // sigma_phi phase
  QubitIndices index{};

  /// Acts on reduced states (fock_dim == 1) of any local dimension.
  JointState apply(const JointState& state) const;
  /// Pure-state unravelling: exp(-i phi S^2 + i x S) where x is drawn by the
  /// caller with variance `thermal_phase_variance()`.
  Eigen::MatrixXcd unitary(int local_dim, double x = 0.0) const;
  /// 2 |alpha|^2 (nbar + 1/2); zero on a closed loop.
  double thermal_phase_variance() const;
  /// Final state of |lower lower> re-expressed as the Bell target phase.
  double chi() const;
};

/// First-order Lamb-Dicke closed form using the mean tone coupling.
MsChannel ms_analytic(const BichromaticPulse& pulse, const MotionalMode& mode);

/// (|ll> + i e^{i chi}|uu>)/sqrt2 on the pair space.
Eigen::VectorXcd bell_state(int local_dim, QubitIndices q, double chi);

/// <target|rho|target> on the reduced state. With maximize_phase the relative
/// phase between |ll> and |uu> is optimized: (rho_ll + rho_uu)/2 + |rho_l,u|.
double gate_fidelity(const JointState& state, const Eigen::VectorXcd& target, bool maximize_phase = false);
/// Fidelity of the channel applied to |ll> against the ideal Bell state with phase chi.
double gate_fidelity(const MsChannel& channel, int local_dim, double chi);

}  // namespace ca43
