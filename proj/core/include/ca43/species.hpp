#pragma once

#include <filesystem>
#include <string>

#include "ca43/key_value.hpp"

namespace ca43 {

/// Bohr magneton over Planck's constant in MHz/G.
inline constexpr double kBohrMagnetonMHzPerGauss = 1.39962449361;

/// Static atomic constants of one ion species. Energies in MHz.
struct IonSpecies {
  std::string name = "43Ca+";
  double nuclear_spin = 3.5;
  double g_J_ground = 2.00225664;
  double g_J_D = 1.2003340;
  double g_I = 2.04675e-4;
  double A_S = -806.4020716;
  double A_D = -3.8931;
  double B_D = -4.241;
  double hyperfine_splitting_S = 3225.6082864;
  double d_lifetime = 1.2;  // seconds
  double mass_amu = 42.958766;

  /// Builtin copy of the shipped data file.
  static IonSpecies ca43();

  /// Throws ConfigError when a constraint is violated.
  void validate() const;

  friend bool operator==(const IonSpecies&, const IonSpecies&) = default;
};

/// Reads the [species] section of a key/value file; absent keys keep the builtin values.
IonSpecies species_from_config(const KeyValueFile& file);
IonSpecies load_species(const std::filesystem::path& path);

/// Location of the shipped ca43.species file (build tree first, then install prefix).
std::filesystem::path default_species_path();

}  // namespace ca43
