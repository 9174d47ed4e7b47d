#pragma once

// Light shift of the optical qubit under the bichromatic drive, and its
// compensation by imbalancing the two tones.
//
// Sign convention: the returned shift is the change of the qubit transition
// frequency in kHz (positive = upwards). A tone detuned by D from a line with
// carrier Rabi frequency W shifts that line by -W^2/(2D) and each of its two
// levels by -+W^2/(4D).

#include <string>
#include <vector>

#include "ca43/coupling_spectrum.hpp"
#include "ca43/gate_dynamics.hpp"

namespace ca43 {

struct StarkLine {
  LevelLabel lower;
  LevelLabel upper;
  double offset = 0.0;          // MHz from the qubit line
  double relative_rabi = 0.0;   // Rabi frequency relative to the qubit line
  bool shares_lower = true;     // the line starts on the qubit's lower level
};

struct StarkContext {
  std::vector<StarkLine> lines;
  /// Shift from far-detuned dipole transitions per unit mean squared tone
  /// Rabi frequency, kHz / kHz^2. Multiplies (Omega_r^2 + Omega_b^2)/2.
  double dipole_coefficient = 0.0;
  /// Lines closer than this are propagated explicitly in numeric_stark_shift.
  double numeric_window = 30.0;  // MHz
};

/// Lines sharing a level with the qubit line, with strengths under `beam`.
StarkContext stark_context(const IonSpecies& species, double field, const BeamGeometry& beam,
                           const LevelLabel& lower, const LevelLabel& upper, double dipole_coefficient = 0.0);

/// Shift from the qubit line itself: (Omega_r^2 - Omega_b^2) / (2 Delta), Delta = nu + delta.
double imbalance_stark_shift(const BichromaticPulse& pulse, const MotionalMode& mode);
/// Spectator lines plus the dipole term.
double external_stark_shift(const BichromaticPulse& pulse, const MotionalMode& mode, const StarkContext& context);
/// Total second-order shift.
double ac_stark_shift(const BichromaticPulse& pulse, const MotionalMode& mode, const StarkContext& context);

struct Compensation {
  bool compensable = false;
  double ratio = 1.0;   // Omega_b / Omega_r
  double omega_red = 0.0;
  double omega_blue = 0.0;
};

/// Ratio that cancels a fixed external `shift_khz` with the imbalance term while
/// holding the mean coupling fixed. Not compensable outside [0.5, 2].
Compensation compensation_ratio(double shift_khz, const BichromaticPulse& pulse, const MotionalMode& mode);
/// Same, with the external shift re-evaluated at the imbalanced couplings.
Compensation compensate(const BichromaticPulse& pulse, const MotionalMode& mode, const StarkContext& context);
BichromaticPulse with_compensation(BichromaticPulse pulse, const Compensation& c);

/// Dipole coefficient that brings the external shift of `pulse` to `target_khz`.
double calibrate_dipole_coefficient(const BichromaticPulse& pulse, const MotionalMode& mode,
                                    const StarkContext& context, double target_khz);

/// Effective qubit shift from the Floquet quasi-energies of the carrier
/// Hamiltonian (both tones, spectator lines within the window as explicit
/// levels, the rest and the dipole term as a static shift), kHz.
double numeric_stark_shift(const BichromaticPulse& pulse, const MotionalMode& mode, const StarkContext& context);

}  // namespace ca43
