#pragma once

// Hyperfine + Zeeman structure of the S1/2 and D5/2 manifolds.
//
// Units: energies in MHz, magnetic field in gauss. Each manifold's energy
// zero is its zero-field centroid. States are expanded in the |m_I, m_J>
// product basis with m_I running from +I down to -I (outer index) and m_J
// from +J down to -J (inner index).

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ca43/species.hpp"

namespace ca43 {

enum class Manifold { S12, D52 };

std::string_view to_string(Manifold m);
/// Accepts "S12"/"S" and "D52"/"D"; anything else is a ConfigError.
Manifold parse_manifold(std::string_view text);

/// Twice the electronic angular momentum J.
int two_j(Manifold m);
/// Basis dimension (2I+1)(2J+1): 16 for S1/2 and 48 for D5/2 with I = 7/2.
int manifold_dimension(const IonSpecies& species, Manifold m);

/// Zero-field adiabatic name of a level.
struct LevelLabel {
  Manifold manifold = Manifold::S12;
  int F = 0;
  int mF = 0;

  friend bool operator==(const LevelLabel&, const LevelLabel&) = default;
  std::string str() const;  // e.g. "S(4,0)"
};

struct ZeemanLevel {
  Manifold manifold = Manifold::S12;
  int F = 0;
  int mF = 0;
  double energy = 0.0;  // MHz
  double field = 0.0;   // gauss at which the level was computed
  Eigen::VectorXd eigenvector;  // over the product basis, unit norm

  LevelLabel label() const { return {manifold, F, mF}; }
};

/// m_I and m_J (doubled) of each product-basis index.
struct ProductBasis {
  std::vector<int> two_mI;
  std::vector<int> two_mJ;
  int size() const { return static_cast<int>(two_mI.size()); }
  int two_mF(int index) const { return two_mI[index] + two_mJ[index]; }
};
ProductBasis product_basis(const IonSpecies& species, Manifold m);

/// Hyperfine part of the Hamiltonian (field independent).
Eigen::MatrixXd hyperfine_operator(const IonSpecies& species, Manifold m);
/// dH/dB = muB (g_J J_z + g_I I_z) in MHz/G.
Eigen::MatrixXd zeeman_operator(const IonSpecies& species, Manifold m);
/// Full Hamiltonian in MHz; real symmetric and block diagonal in m_F.
Eigen::MatrixXd build_hamiltonian(const IonSpecies& species, Manifold m, double field_gauss);

/// Eigenlevels sorted by (mF, energy), ties broken by F. F labels are assigned by
/// maximum-overlap tracking from B = 0 in 0.1 G steps. Requires B >= 0.
std::vector<ZeemanLevel> eigenlevels(const IonSpecies& species, Manifold m, double field_gauss);

/// Adiabatic label tracker with cached 0.1 G checkpoints. Queries at many fields
/// reuse the checkpoints, so scans and root searches stay cheap. Not thread-safe;
/// use one instance per thread.
class ZeemanTracker {
 public:
  ZeemanTracker(const IonSpecies& species, Manifold m, double step_gauss = 0.1);

  /// Accepts negative fields (needed for two-sided differences at B = 0).
  std::vector<ZeemanLevel> levels_at(double field_gauss);
  ZeemanLevel level_at(const LevelLabel& label, double field_gauss);

  /// Smallest overlap between consecutive tracking steps seen so far.
  double min_overlap() const { return min_overlap_; }
  Manifold manifold() const { return manifold_; }
  const Eigen::MatrixXd& zeeman() const { return zeeman_; }

 private:
  struct Block {
    int two_mF = 0;
    std::vector<int> indices;
    std::vector<int> F;     // label of each tracked column
    Eigen::MatrixXd hf;     // sub-blocks of the operators
    Eigen::MatrixXd zee;
    std::map<long, Eigen::MatrixXd> checkpoints;  // step index -> tracked eigenvectors (columns)
  };

  Eigen::MatrixXd track_step(const Block& block, const Eigen::MatrixXd& previous, double field,
                             Eigen::VectorXd& energies);
  const Eigen::MatrixXd& checkpoint(Block& block, long step);

  IonSpecies species_;
  Manifold manifold_;
  double step_;
  Eigen::MatrixXd zeeman_;
  std::vector<Block> blocks_;
  double min_overlap_ = 1.0;
};

/// Closed-form Breit-Rabi energy of an S1/2 level. Stretched states use the
/// exactly linear branch.
double breit_rabi_energy(const IonSpecies& species, int F, int mF, double field_gauss);

/// Frequency of the a -> b transition relative to the field-free interval
/// (E_b - E_a in MHz). Both levels must come from the same field.
double transition_frequency(const ZeemanLevel& a, const ZeemanLevel& b);

struct FieldSensitivity {
  double hellmann_feynman = 0.0;   // MHz/G
  double finite_difference = 0.0;  // MHz/G, central difference with 1 mG step
  bool degenerate_warning = false;

  double value() const { return hellmann_feynman; }
};

/// d(transition_frequency)/dB computed two independent ways.
FieldSensitivity field_sensitivity(const IonSpecies& species, const LevelLabel& a, const LevelLabel& b,
                                   double field_gauss);
/// Single-level dE/dB (Hellmann-Feynman, MHz/G).
double level_sensitivity(const IonSpecies& species, const LevelLabel& level, double field_gauss);

/// Field in [lo, hi] where the a<->b sensitivity changes sign, bisected to 1 mG.
/// Returns nullopt when the sensitivity keeps its sign over the range.
std::optional<double> find_insensitive_field(const IonSpecies& species, const LevelLabel& a,
                                             const LevelLabel& b, double lo_gauss, double hi_gauss);

/// Looks a label up in a level list; throws UsageError when absent.
const ZeemanLevel& find_level(const std::vector<ZeemanLevel>& levels, const LevelLabel& label);

// Named qubit states.
enum class QubitKind { optical, hyperfine };

struct NamedQubit {
  std::string name;
  LevelLabel lower;
  LevelLabel upper;
  QubitKind kind = QubitKind::optical;
};

namespace named {
inline constexpr LevelLabel down{Manifold::S12, 4, 0};          // |down> = S(F=4, mF=0)
inline constexpr LevelLabel up{Manifold::S12, 3, 0};            // |up>   = S(F=3, mF=0)
inline constexpr LevelLabel upsilon{Manifold::D52, 6, 1};       // optical upper level, beam 1
inline constexpr LevelLabel upsilon_prime{Manifold::D52, 4, 2};  // optical upper level, beam 2
inline constexpr LevelLabel stretched{Manifold::S12, 4, 4};     // optical pumping target
inline constexpr LevelLabel transfer{Manifold::D52, 3, 2};      // intermediate shelf during preparation
}  // namespace named

NamedQubit optical_qubit();        // down <-> upsilon
NamedQubit optical_qubit_prime();  // down <-> upsilon'
NamedQubit hyperfine_qubit();      // down <-> up

}  // namespace ca43
