#pragma once

// Time-ordered integration of the bichromatic Hamiltonian on internal x motion.
//
// Frame: interaction picture of the qubit and of the mode. Tones sit at
// +-(nu + delta) from the qubit carrier. Each tone couples through
//   (Omega/2) e^{i phi_t} e^{-i Delta t} sigma+ [1 + i eta (a e^{-i nu t} + a^dag e^{i nu t})] + h.c.
// with phi_t = phi - pi/2. Without off-resonant terms only the resonant
// sideband of each tone is kept.

#include <vector>

#include "ca43/gate_dynamics.hpp"
#include "ca43/joint_state.hpp"

namespace ca43 {

/// Additional S<->D line driven by both tones. One of its two local levels must
/// be a qubit level (or a level fixed by an earlier spectator).
struct SpectatorCoupling {
  int lower = 2;                 // local index of the S1/2 level
  int upper = 1;                 // local index of the D5/2 level
  double relative_rabi = 0.0;    // carrier Rabi frequency relative to the qubit line
  double offset = 0.0;           // MHz, line frequency minus qubit frequency
};

struct MsNumericOptions {
  bool offresonant_terms = false;  // carrier and counter-rotating sideband of each tone
  std::vector<SpectatorCoupling> spectators;
  double steps_per_period = 200.0;
  double max_phase_per_step = 0.02;  // bound on |H| dt
  int truncation_check_interval = 64;
};

struct MsNumericResult {
  JointState state;
  int steps = 0;
  double time_step = 0.0;        // us
  double max_norm_error = 0.0;   // | |psi| - 1 | over all propagated vectors
  double max_top_population = 0.0;  // population of the two highest Fock states, max over time
};

/// Propagates `initial` (its fock_dim sets the truncation; a traced state is
/// propagated without motion). Mixed inputs are propagated as their eigen-ensemble.
/// Throws TruncationError when the top two Fock populations exceed 1e-8.
MsNumericResult ms_numeric(const BichromaticPulse& pulse, const MotionalMode& mode, const JointState& initial,
                           const MsNumericOptions& options = {});

/// |ll> x thermal(mode), propagated and traced: the gate acting on the usual input.
JointState ms_numeric_bell(const BichromaticPulse& pulse, const MotionalMode& mode, int local_dim, int l1, int l2,
                           const MsNumericOptions& options = {});

}  // namespace ca43
