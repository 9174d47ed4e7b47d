#pragma once

// Electric-quadrupole S1/2 <-> D5/2 line strengths and spectra.

#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "ca43/atomic_structure.hpp"

namespace ca43 {

enum class BeamId { beam1, beam2, custom };
enum class Polarization { sigma_plus, sigma_minus, linear };

std::string_view to_string(BeamId id);
BeamId parse_beam(std::string_view text);
Polarization parse_polarization(std::string_view text);

struct BeamGeometry {
  BeamId id = BeamId::custom;
  double angle_k_to_B = 0.0;     // rad
  double angle_k_to_axis = std::numbers::pi / 4.0;  // rad, only used for the Lamb-Dicke projection
  Polarization polarization = Polarization::linear;
  double gamma = 0.0;            // rad, linear polarization angle to the (k, B) plane
  double impurity = 0.0;         // amplitude fraction in [0, 0.2]

  /// k along B, sigma+ light.
  static BeamGeometry beam1(double impurity = 0.0);
  /// k perpendicular to B, linear polarization perpendicular to B.
  static BeamGeometry beam2(double impurity = 0.0);

  void validate() const;
};

/// Polarization-geometry factor for the Delta m channel, excluding the impurity
/// term. Normalized so that the five squared factors of a linearly polarized beam
/// sum to 1/3.
double ideal_geometry_factor(int delta_m, const BeamGeometry& beam);

/// Ideal factor, or impurity times the largest ideal factor for channels the
/// ideal beam does not drive.
double geometry_factor(int delta_m, const BeamGeometry& beam);

/// Reduced quadrupole amplitude between an S1/2 level and a D5/2 level: the
/// electronic rank-2 Clebsch-Gordan coefficient summed over shared m_I components.
double quadrupole_amplitude(const ZeemanLevel& s, const ZeemanLevel& d);

/// Unnormalized line strength: |quadrupole_amplitude| x geometry_factor.
double line_strength(const ZeemanLevel& s, const ZeemanLevel& d, const BeamGeometry& beam);

enum class SidebandTag { carrier, axial_red, axial_blue, micromotional };
std::string_view to_string(SidebandTag tag);

struct TransitionLine {
  LevelLabel lower;
  LevelLabel upper;
  int delta_m = 0;
  double offset = 0.0;          // MHz from the reference line
  double strength = 0.0;        // unnormalized line strength
  double relative_rabi = 0.0;   // strength / strongest carrier in the report
  SidebandTag tag = SidebandTag::carrier;
};

struct SpectrumOptions {
  double field = 6.0;           // G
  BeamGeometry beam = BeamGeometry::beam1();
  LevelLabel reference_lower = named::down;
  LevelLabel reference_upper = named::upsilon;
  std::optional<int> lower_F;   // only lines from this S1/2 F multiplet
  std::optional<int> upper_F;   // only lines to this D5/2 F multiplet
  double span = 10.0;           // MHz, lines with |offset| <= span/2 are kept
  bool include_sidebands = false;
  double axial_frequency = 1.2;          // MHz
  double micromotion_frequency = 25.5;   // MHz
};

/// Lines with |Delta m| <= 2 sorted by (offset, delta_m, upper.F, upper.mF, lower.F, lower.mF).
/// Sideband markers are attached to the reference line and carry zero strength.
std::vector<TransitionLine> spectrum(const IonSpecies& species, const SpectrumOptions& options);

/// Strength of (lower -> upper) with the given beam, unnormalized.
double relative_rabi(const IonSpecies& species, const LevelLabel& lower, const LevelLabel& upper,
                     const BeamGeometry& beam, double field);

/// strength(main) / strength(other). Infinite when the other line is forbidden.
double suppression_ratio(const IonSpecies& species, const LevelLabel& main_lower, const LevelLabel& main_upper,
                         const LevelLabel& other_lower, const LevelLabel& other_upper, const BeamGeometry& beam,
                         double field);

/// Lines with |Delta m| <= 2 sharing the lower or the upper level with the reference line.
std::vector<TransitionLine> neighborhood(const IonSpecies& species, const LevelLabel& ref_lower,
                                         const LevelLabel& ref_upper, const BeamGeometry& beam, double field);

/// Impurity that makes the worst neighbour of the reference line whose Delta m
/// differs from the reference channel suppressed by `target` in Rabi frequency.
double calibrate_impurity(const IonSpecies& species, const LevelLabel& ref_lower, const LevelLabel& ref_upper,
                          BeamGeometry beam, double field, double target = 38.0);

struct Coincidence {
  std::string description;
  TransitionLine carrier;       // the line that is hit
  std::string sideband;         // which sideband of the reference line
  double gap = 0.0;             // MHz, absolute
};

struct CoincidenceOptions {
  double threshold = 0.05;      // MHz
  BeamGeometry beam = BeamGeometry::beam1();
  LevelLabel reference_lower = named::down;
  LevelLabel reference_upper = named::upsilon;
};

/// Ground-state adjacent Zeeman splittings of the reference F multiplet that
/// lie within the threshold of the trap frequency, and driven carrier lines of
/// the reference neighbourhood that sit within the threshold of a first
/// motional sideband of the reference line.
std::vector<Coincidence> coincidence_report(const IonSpecies& species, double field, double axial_frequency,
                                            const CoincidenceOptions& options = {});

/// |E(F, mF+1) - E(F, mF)| in S1/2, in MHz.
double adjacent_zeeman_splitting(const IonSpecies& species, int F, int mF, double field);

}  // namespace ca43
