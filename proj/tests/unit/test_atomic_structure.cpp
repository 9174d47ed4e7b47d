#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "ca43/atomic_structure.hpp"
#include "ca43/errors.hpp"

namespace {

using namespace ca43;

const IonSpecies kCa = IonSpecies::ca43();
constexpr double kMuB = 1.39962449361;  // MHz/G

// Zero-field hyperfine energy from the A and B constants (Casimir form).
double casimir_energy(double A, double B, double I, double J, double F) {
  const double K = F * (F + 1) - I * (I + 1) - J * (J + 1);
  double e = 0.5 * A * K;
  if (I > 0.5 && J > 0.5)
    e += B * (0.75 * K * (K + 1) - I * (I + 1) * J * (J + 1)) / (2 * I * (2 * I - 1) * J * (2 * J - 1));
  return e;
}

// Breit-Rabi closed form with H = A I.J + muB B (g_J J_z + g_I I_z).
double breit_rabi_oracle(int F, int mF, double B) {
  const double I = kCa.nuclear_spin;
  const double dE = kCa.A_S * (I + 0.5);
  const double x = (kCa.g_J_ground - kCa.g_I) * kMuB * B / dE;
  const double base = -dE / (2 * (2 * I + 1)) + kCa.g_I * kMuB * B * mF;
  const double sign = F == static_cast<int>(I + 0.5) ? 1.0 : -1.0;
  if (std::abs(mF) == static_cast<int>(I + 0.5)) {
    const double s = mF > 0 ? 1.0 : -1.0;
    return base + 0.5 * dE * (1.0 + s * x);
  }
  return base + sign * 0.5 * dE * std::sqrt(1.0 + 4.0 * mF * x / (2 * I + 1) + x * x);
}

TEST(AtomicStructure, DimensionsAndHermiticity) {
  EXPECT_EQ(manifold_dimension(kCa, Manifold::S12), 16);
  EXPECT_EQ(manifold_dimension(kCa, Manifold::D52), 48);
  for (Manifold m : {Manifold::S12, Manifold::D52}) {
    const auto basis = product_basis(kCa, m);
    const Eigen::MatrixXd h = build_hamiltonian(kCa, m, 7.3);
    ASSERT_EQ(h.rows(), basis.size());
    EXPECT_LT((h - h.transpose()).cwiseAbs().maxCoeff(), 1e-12);
    for (int i = 0; i < basis.size(); ++i)
      for (int j = 0; j < basis.size(); ++j)
        if (basis.two_mF(i) != basis.two_mF(j)) {
          EXPECT_EQ(h(i, j), 0.0);
        }
    // Centroid convention: the hyperfine operator is traceless.
    EXPECT_NEAR(hyperfine_operator(kCa, m).trace(), 0.0, 1e-9);
  }
}

TEST(AtomicStructure, ZeroFieldMultipletsMatchCasimirFormula) {
  const double I = kCa.nuclear_spin;
  struct Case {
    Manifold m;
    double J, A, B;
  };
  for (const Case& c : {Case{Manifold::S12, 0.5, kCa.A_S, 0.0}, Case{Manifold::D52, 2.5, kCa.A_D, kCa.B_D}}) {
    std::map<int, int> count;
    for (const auto& lv : eigenlevels(kCa, c.m, 0.0)) {
      EXPECT_NEAR(lv.energy, casimir_energy(c.A, c.B, I, c.J, lv.F), 1e-9) << lv.label().str();
      ++count[lv.F];
    }
    for (const auto& [F, n] : count) EXPECT_EQ(n, 2 * F + 1);
  }
}

TEST(AtomicStructure, GroundLevelsMatchBreitRabi) {
  for (double B : {0.0, 0.5, 6.0, 146.0942, 400.0}) {
    for (const auto& lv : eigenlevels(kCa, Manifold::S12, B)) {
      EXPECT_NEAR(lv.energy, breit_rabi_oracle(lv.F, lv.mF, B), 1e-8) << lv.label().str() << " at " << B;
      EXPECT_NEAR(breit_rabi_energy(kCa, lv.F, lv.mF, B), breit_rabi_oracle(lv.F, lv.mF, B), 1e-8);
    }
  }
}

TEST(AtomicStructure, EigenvectorsAreOrthonormalEigenpairs) {
  const double B = 12.5;
  const auto levels = eigenlevels(kCa, Manifold::D52, B);
  const Eigen::MatrixXd h = build_hamiltonian(kCa, Manifold::D52, B);
  for (std::size_t a = 0; a < levels.size(); ++a) {
    EXPECT_LT((h * levels[a].eigenvector - levels[a].energy * levels[a].eigenvector).norm(), 1e-9);
    for (std::size_t b = a; b < levels.size(); ++b)
      EXPECT_NEAR(levels[a].eigenvector.dot(levels[b].eigenvector), a == b ? 1.0 : 0.0, 1e-10);
  }
}

TEST(AtomicStructure, OrderingIsByMfThenEnergy) {
  for (double B : {0.0, 3.4, 6.0}) {
    const auto levels = eigenlevels(kCa, Manifold::D52, B);
    for (std::size_t k = 1; k < levels.size(); ++k) {
      ASSERT_LE(levels[k - 1].mF, levels[k].mF);
      if (levels[k - 1].mF == levels[k].mF) {
        EXPECT_LE(levels[k - 1].energy, levels[k].energy + 1e-12);
      }
    }
  }
}

TEST(AtomicStructure, EnergiesSumToZeroAtEveryField) {
  // Both the hyperfine and the Zeeman operator are traceless.
  for (double B : {0.0, 2.0, 50.0}) {
    double s = 0.0;
    for (const auto& lv : eigenlevels(kCa, Manifold::D52, B)) s += lv.energy;
    EXPECT_NEAR(s, 0.0, 1e-8);
  }
}

TEST(AtomicStructure, NegativeFieldMirrorsProjection) {
  ZeemanTracker tracker(kCa, Manifold::S12);
  for (const auto& lv : tracker.levels_at(4.0)) {
    const auto mirrored = tracker.level_at({Manifold::S12, lv.F, -lv.mF}, -4.0);
    EXPECT_NEAR(mirrored.energy, lv.energy, 1e-9) << lv.label().str();
  }
  EXPECT_THROW(eigenlevels(kCa, Manifold::S12, -1.0), UsageError);
}

TEST(AtomicStructure, TrackerAgreesWithEigenlevels) {
  ZeemanTracker tracker(kCa, Manifold::D52);
  const auto a = tracker.levels_at(6.0);
  const auto b = eigenlevels(kCa, Manifold::D52, 6.0);
  ASSERT_EQ(a.size(), b.size());
  for (const auto& lv : b) EXPECT_NEAR(find_level(a, lv.label()).energy, lv.energy, 1e-10);
}

TEST(AtomicStructure, StretchedStateIsExactlyLinear) {
  const double slope = kMuB * (0.5 * kCa.g_J_ground + 3.5 * kCa.g_I);
  for (double B : {0.0, 1.0, 30.0, 200.0})
    EXPECT_NEAR(level_sensitivity(kCa, named::stretched, B), slope, 1e-10);
}

TEST(AtomicStructure, HellmannFeynmanMatchesFiniteDifferenceProperty) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> field(0.5, 40.0);
  const auto s_levels = eigenlevels(kCa, Manifold::S12, 1.0);
  const auto d_levels = eigenlevels(kCa, Manifold::D52, 1.0);
  for (int trial = 0; trial < 25; ++trial) {
    const auto& a = s_levels[rng() % s_levels.size()];
    const auto& b = d_levels[rng() % d_levels.size()];
    const double B = field(rng);
    const auto s = field_sensitivity(kCa, a.label(), b.label(), B);
    EXPECT_NEAR(s.hellmann_feynman, s.finite_difference, 1e-6) << a.label().str() << "->" << b.label().str();
    // Transition sensitivity is the difference of level sensitivities.
    EXPECT_NEAR(s.value(), level_sensitivity(kCa, b.label(), B) - level_sensitivity(kCa, a.label(), B), 1e-9);
  }
}

TEST(AtomicStructure, GroundClockSensitivityMatchesBreitRabiDerivative) {
  for (double B : {3.0, 6.0, 100.0}) {
    const double h = 1e-4;
    const double oracle = ((breit_rabi_oracle(3, 0, B + h) - breit_rabi_oracle(4, 0, B + h)) -
                           (breit_rabi_oracle(3, 0, B - h) - breit_rabi_oracle(4, 0, B - h))) /
                          (2 * h);
    EXPECT_NEAR(field_sensitivity(kCa, named::down, named::up, B).value(), oracle, 1e-6);
  }
}

TEST(AtomicStructure, InsensitiveFieldRoots) {
  const auto b0 = find_insensitive_field(kCa, named::down, {Manifold::S12, 3, 1}, 1.0, 300.0);
  ASSERT_TRUE(b0.has_value());
  EXPECT_LT(std::abs(field_sensitivity(kCa, named::down, {Manifold::S12, 3, 1}, *b0).value()), 1e-5);
  // down <-> up only vanishes at B = 0: no sign change on [1, 300] G.
  EXPECT_FALSE(find_insensitive_field(kCa, named::down, named::up, 1.0, 300.0).has_value());
  EXPECT_THROW(find_insensitive_field(kCa, named::down, named::up, 5.0, 1.0), UsageError);
}

TEST(AtomicStructure, ClockLevelsShiftQuadraticallyAtSixGauss) {
  // Each mF=0 level moves by about 22 kHz at 6 G, in opposite directions, so the
  // S(3,0) - S(4,0) splitting grows by about 44 kHz.
  const auto at = [](double B, int F) { return find_level(eigenlevels(kCa, Manifold::S12, B), {Manifold::S12, F, 0}).energy; };
  const double dE = std::abs(kCa.A_S) * (kCa.nuclear_spin + 0.5);
  const double x = (kCa.g_J_ground - kCa.g_I) * kMuB * 6.0 / dE;
  const double per_level = 0.5 * dE * (std::sqrt(1.0 + x * x) - 1.0);
  EXPECT_NEAR(per_level, 0.022, 0.001);
  EXPECT_NEAR(at(6.0, 3) - at(0.0, 3), per_level, 1e-9);
  EXPECT_NEAR(at(0.0, 4) - at(6.0, 4), per_level, 1e-9);
  EXPECT_NEAR((at(6.0, 3) - at(6.0, 4)) - (at(0.0, 3) - at(0.0, 4)), 2.0 * per_level, 1e-9);
}

TEST(AtomicStructure, LabelsAndLookup) {
  EXPECT_EQ(named::down.str(), "S(4,0)");
  EXPECT_EQ(named::upsilon.str(), "D(6,1)");
  EXPECT_EQ(parse_manifold("D"), Manifold::D52);
  EXPECT_THROW(parse_manifold("P32"), ConfigError);
  const auto levels = eigenlevels(kCa, Manifold::S12, 1.0);
  EXPECT_THROW(find_level(levels, {Manifold::S12, 5, 0}), UsageError);
  EXPECT_THROW(breit_rabi_energy(kCa, 2, 0, 1.0), UsageError);
}

}  // namespace
