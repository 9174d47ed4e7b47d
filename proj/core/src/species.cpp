#include "ca43/species.hpp"

#include <cmath>

#include "ca43/errors.hpp"

namespace ca43 {

IonSpecies IonSpecies::ca43() { return IonSpecies{}; }

void IonSpecies::validate() const {
  const double two_i = 2.0 * nuclear_spin;
  if (nuclear_spin <= 0.0 || std::abs(two_i - std::round(two_i)) > 1e-12) {
    throw ConfigError("species " + name + ": nuclear_spin must be a positive half-integer");
  }
  if (hyperfine_splitting_S <= 0.0) {
    throw ConfigError("species " + name + ": hyperfine_splitting_S must be positive");
  }
  // Zero-field S1/2 splitting for J=1/2 is |A_S| (I + 1/2).
  const double from_a = std::abs(A_S) * (nuclear_spin + 0.5);
  if (std::abs(from_a - hyperfine_splitting_S) > 1e-3) {
    throw ConfigError("species " + name + ": hyperfine_splitting_S disagrees with A_S by more than 1 kHz");
  }
  if (d_lifetime <= 0.0) throw ConfigError("species " + name + ": d_lifetime must be positive");
  if (g_J_ground <= 0.0 || g_J_D <= 0.0) throw ConfigError("species " + name + ": g_J must be positive");
  if (mass_amu <= 0.0) throw ConfigError("species " + name + ": mass_amu must be positive");
}

IonSpecies species_from_config(const KeyValueFile& file) {
  IonSpecies s;
  s.name = file.get_string("species.name", s.name);
  const long version = file.get_int("species.format_version", 1);
  if (version != 1) throw ConfigError(file.origin() + ": unsupported species format_version");
  s.nuclear_spin = file.get_double("species.nuclear_spin", s.nuclear_spin);
  s.g_J_ground = file.get_double("species.g_J_ground", s.g_J_ground);
  s.g_J_D = file.get_double("species.g_J_D", s.g_J_D);
  s.g_I = file.get_double("species.g_I", s.g_I);
  s.A_S = file.get_double("species.A_S", s.A_S);
  s.A_D = file.get_double("species.A_D", s.A_D);
  s.B_D = file.get_double("species.B_D", s.B_D);
  s.hyperfine_splitting_S = file.get_double("species.hyperfine_splitting_S", s.hyperfine_splitting_S);
  s.d_lifetime = file.get_double("species.d_lifetime", s.d_lifetime);
  s.mass_amu = file.get_double("species.mass_amu", s.mass_amu);
  s.validate();
  return s;
}

IonSpecies load_species(const std::filesystem::path& path) {
  return species_from_config(KeyValueFile::load(path));
}

std::filesystem::path default_species_path() {
  const std::filesystem::path build = std::filesystem::path(CA43_BUILD_DATA_DIR) / "ca43.species";
  if (std::filesystem::exists(build)) return build;
  return std::filesystem::path(CA43_INSTALL_DATA_DIR) / "ca43.species";
}

}  // namespace ca43
