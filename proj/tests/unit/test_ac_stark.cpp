#include <gtest/gtest.h>

#include <cmath>

#include "ca43/ac_stark.hpp"
#include "ca43/errors.hpp"

namespace {

using namespace ca43;

BichromaticPulse pulse(double red, double blue) {
  BichromaticPulse p;
  p.omega_red = red;
  p.omega_blue = blue;
  p.detuning_delta = 10.0;
  return p;
}

MotionalMode mode() {
  MotionalMode m;
  m.frequency = 1.2;
  return m;
}

TEST(AcStark, ImbalanceShiftFromSecondOrderPerturbation) {
  // Blue tone at +Delta lowers the line by Omega_b^2 / (2 Delta), red raises it.
  const double delta = 1210.0;  // kHz, nu + delta
  EXPECT_NEAR(imbalance_stark_shift(pulse(100.0, 120.0), mode()), (100.0 * 100.0 - 120.0 * 120.0) / (2 * delta),
              1e-12);
  EXPECT_EQ(imbalance_stark_shift(pulse(80.0, 80.0), mode()), 0.0);
  auto scaled = pulse(100.0, 120.0);
  scaled.coupling_scale = 0.5;
  EXPECT_NEAR(imbalance_stark_shift(scaled, mode()), 0.25 * (100.0 * 100.0 - 120.0 * 120.0) / (2 * delta), 1e-12);
}

TEST(AcStark, SpectatorLineShiftsOneSharedLevel) {
  StarkContext ctx;
  StarkLine l;
  l.offset = 2.0;  // MHz
  l.relative_rabi = 0.5;
  ctx.lines.push_back(l);
  const auto p = pulse(100.0, 100.0);
  // Each tone shifts the shared level by W^2/(4 D), D = tone - line.
  const double w = 50.0, d_blue = 1210.0 - 2000.0, d_red = -1210.0 - 2000.0;
  const double expected = -w * w / (4 * d_blue) - w * w / (4 * d_red);
  EXPECT_NEAR(external_stark_shift(p, mode(), ctx), expected, 1e-12);
  ctx.dipole_coefficient = 1e-4;
  EXPECT_NEAR(external_stark_shift(p, mode(), ctx), expected + 1e-4 * 1e4, 1e-12);
  EXPECT_NEAR(ac_stark_shift(p, mode(), ctx), external_stark_shift(p, mode(), ctx), 1e-15);
}

TEST(AcStark, FixedShiftCompensationCancelsAndKeepsMean) {
  const auto p = pulse(110.0, 110.0);
  for (double shift : {-5.0, -1.0, 0.5, 3.5}) {
    const auto c = compensation_ratio(shift, p, mode());
    ASSERT_TRUE(c.compensable) << shift;
    EXPECT_NEAR(0.5 * (c.omega_red + c.omega_blue), 110.0, 1e-12);
    EXPECT_NEAR(c.omega_blue / c.omega_red, c.ratio, 1e-12);
    EXPECT_NEAR(imbalance_stark_shift(with_compensation(p, c), mode()) + shift, 0.0, 1e-10);
  }
  // Positive external shift needs a stronger blue tone.
  EXPECT_GT(compensation_ratio(3.5, p, mode()).ratio, 1.0);
  EXPECT_FALSE(compensation_ratio(500.0, p, mode()).compensable);
  EXPECT_TRUE(compensation_ratio(0.0, p, mode()).compensable);
}

TEST(AcStark, SelfConsistentCompensationZeroesTotalShift) {
  StarkContext ctx;
  StarkLine l;
  l.offset = -3.0;
  l.relative_rabi = 0.8;
  ctx.lines.push_back(l);
  const auto p = pulse(110.0, 110.0);
  ctx.dipole_coefficient = calibrate_dipole_coefficient(p, mode(), ctx, 3.5);
  EXPECT_NEAR(external_stark_shift(p, mode(), ctx), 3.5, 1e-12);
  const auto c = compensate(p, mode(), ctx);
  ASSERT_TRUE(c.compensable);
  EXPECT_NEAR(ac_stark_shift(with_compensation(p, c), mode(), ctx), 0.0, 1e-9);
  EXPECT_NEAR(0.5 * (c.omega_red + c.omega_blue), 110.0, 1e-12);
  // The fixed-shift ratio ignores the change of the external term and leaves a residual.
  const auto fixed = compensation_ratio(3.5, p, mode());
  EXPECT_GT(std::abs(ac_stark_shift(with_compensation(p, fixed), mode(), ctx)), 1e-3);
}

TEST(AcStark, FloquetShiftMatchesPerturbationTheory) {
  StarkContext ctx;
  const auto p = pulse(100.0, 130.0);
  const double analytic = ac_stark_shift(p, mode(), ctx);
  const double numeric = numeric_stark_shift(p, mode(), ctx);
  EXPECT_NEAR(numeric, analytic, 0.02 * std::abs(analytic));

  StarkLine l;
  l.offset = 5.0;
  l.relative_rabi = 0.6;
  ctx.lines.push_back(l);
  l.offset = -4.0;
  l.relative_rabi = 0.3;
  l.shares_lower = false;
  ctx.lines.push_back(l);
  const double analytic2 = ac_stark_shift(p, mode(), ctx);
  EXPECT_NEAR(numeric_stark_shift(p, mode(), ctx), analytic2, 0.02 * std::abs(analytic2) + 0.01);
}

TEST(AcStark, ContextFromSpecies) {
  const auto species = IonSpecies::ca43();
  const auto beam = BeamGeometry::beam1(0.02);
  const auto ctx = stark_context(species, 6.0, beam, named::down, named::upsilon);
  ASSERT_FALSE(ctx.lines.empty());
  const double ref = relative_rabi(species, named::down, named::upsilon, beam, 6.0);
  for (const auto& l : ctx.lines) {
    EXPECT_TRUE(l.shares_lower ? l.lower == named::down : l.upper == named::upsilon);
    EXPECT_NEAR(l.relative_rabi, relative_rabi(species, l.lower, l.upper, beam, 6.0) / ref, 1e-12);
  }
  EXPECT_THROW(stark_context(species, 6.0, BeamGeometry::beam1(), named::down, {Manifold::D52, 4, 0}), UsageError);
}

}  // namespace
