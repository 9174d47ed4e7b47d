#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "ca43/errors.hpp"
#include "ca43/experiments.hpp"
#include "ca43/sequence.hpp"

namespace {

using namespace ca43;
constexpr double kPi = std::numbers::pi;

SequenceStep carrier(double theta, double phase, double error = 0.0, const std::string& label = "pulse") {
  SequenceStep s;
  s.kind = StepKind::carrier_pulse;
  s.label = label;
  s.level_a = level::down;
  s.level_b = level::optical;
  s.theta = theta;
  s.phase = phase;
  s.error_rate = error;
  return s;
}

SequenceContext quiet_context() {
  SequenceContext ctx;
  ctx.noise = NoiseModel{};
  ctx.mode.nbar = 0.0;
  ctx.mode.n_max = 10;
  ctx.gate = maximally_entangling_pulse(ctx.mode, 10.0);
  return ctx;
}

double prob(const Eigen::MatrixXcd& rho, int l1, int l2) {
  const Eigen::VectorXcd v = pair_basis_state(l1, l2);
  return (v.adjoint() * rho * v)(0, 0).real();
}

TEST(Sequence, NamesRoundTrip) {
  for (int l = 0; l < level::count; ++l) EXPECT_EQ(parse_level(level_name(l)), l);
  EXPECT_THROW(parse_level("nowhere"), ConfigError);
  for (StepKind k : {StepKind::optical_pump, StepKind::transfer_pulse, StepKind::pmt_check, StepKind::carrier_pulse,
                     StepKind::microwave_pulse, StepKind::ms_gate, StepKind::wait, StepKind::shelve, StepKind::detect,
                     StepKind::parity_analysis})
    EXPECT_EQ(parse_step_kind(to_string(k)), k);
  EXPECT_THROW(parse_step_kind("teleport"), ConfigError);
  EXPECT_TRUE(is_bright(level::down));
  EXPECT_TRUE(is_bright(level::bright_reservoir));
  EXPECT_FALSE(is_bright(level::optical));
  EXPECT_FALSE(is_bright(level::detect_shelf));
}

TEST(Sequence, ValidationNamesTheOffendingStep) {
  const auto ctx = quiet_context();
  std::vector<SequenceStep> seq{carrier(kPi, 0.0), carrier(kPi, 0.0, 0.9, "bad pulse")};
  try {
    validate_sequence(seq, ctx);
    FAIL() << "expected RunError";
  } catch (const RunError& e) {
    EXPECT_EQ(e.step(), "bad pulse");
  }
  auto same = carrier(kPi, 0.0);
  same.level_b = level::down;
  EXPECT_THROW(validate_sequence({same}, ctx), RunError);
  auto ctx_bad = ctx;
  ctx_bad.field = -1.0;
  EXPECT_THROW(validate_sequence({carrier(kPi, 0.0)}, ctx_bad), RunError);
}

TEST(Sequence, IdealCarrierPulseTransfersBothIons) {
  const auto ctx = quiet_context();
  const auto run = run_ensemble({carrier(kPi, 0.0)}, ctx);
  ASSERT_EQ(run.size(), 1u);
  EXPECT_NEAR(prob(run[0].rho, level::optical, level::optical), 1.0, 1e-14);
  EXPECT_NEAR(run[0].fidelity, 1.0, 1e-14);
  const auto ideal = ideal_states({carrier(kPi / 2, 0.0)}, ctx);
  EXPECT_NEAR(std::norm(ideal[0](0)), 0.25, 1e-14);
}

TEST(Sequence, DepolarizingKnobEqualsStepInfidelityProperty) {
  const auto ctx = quiet_context();
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 0.6), ang(0.0, 2 * kPi);
  for (int trial = 0; trial < 20; ++trial) {
    const double e = u(rng);
    const auto step = carrier(ang(rng), ang(rng), e);
    const Eigen::VectorXcd in = ideal_states({carrier(ang(rng), ang(rng))}, ctx)[0];
    EXPECT_NEAR(step_infidelity({step}, in, ctx), e, 1e-12);
  }
}

TEST(Sequence, PumpAndTransferFailureProbabilities) {
  const auto ctx = quiet_context();
  SequenceStep pump;
  pump.kind = StepKind::optical_pump;
  pump.error_rate = 0.04;
  pump.bright_fraction = 0.3;
  const Eigen::VectorXcd start = pair_basis_state(level::down, level::down);
  EXPECT_NEAR(step_infidelity({pump}, start, ctx), 0.04, 1e-12);

  SequenceStep transfer;
  transfer.kind = StepKind::transfer_pulse;
  transfer.level_a = level::stretched;
  transfer.level_b = level::shelf;
  transfer.error_rate = 0.02;
  EXPECT_NEAR(step_infidelity({transfer}, pair_basis_state(level::stretched, level::stretched), ctx), 0.02, 1e-12);
}

TEST(Sequence, PmtCheckRejectsBrightFailures) {
  const auto ctx = quiet_context();
  SequenceStep pump;
  pump.kind = StepKind::optical_pump;
  pump.error_rate = 0.2;
  pump.bright_fraction = 1.0;
  SequenceStep transfer;
  transfer.kind = StepKind::transfer_pulse;
  transfer.level_a = level::stretched;
  transfer.level_b = level::shelf;
  SequenceStep check;
  check.kind = StepKind::pmt_check;
  const auto run = run_ensemble({pump, transfer, check}, ctx);

  // Oracle: per-ion failure f, k failed ions are bright and survive the check with 1 - r_k.
  const double f = 1.0 - std::sqrt(0.8);
  const double p[3] = {(1 - f) * (1 - f), 2 * f * (1 - f), f * f};
  double kept = 0.0;
  for (int k = 0; k < 3; ++k) kept += p[k] * (1.0 - check_rejection_probability(ctx.detection, k));
  EXPECT_NEAR(run[2].kept, kept, 1e-12);
  EXPECT_NEAR(run[2].fidelity, p[0] * (1.0 - check_rejection_probability(ctx.detection, 0)) / kept, 1e-12);
  EXPECT_GT(run[2].fidelity, run[1].fidelity);
}

TEST(Sequence, TrajectoriesAgreeWithEnsemble) {
  const auto ctx = quiet_context();
  const std::vector<SequenceStep> seq{carrier(kPi / 2, 0.3, 0.1)};
  const auto rho = run_ensemble(seq, ctx).back().rho;
  double p_bright[3] = {0, 0, 0};
  for (int a = 0; a < level::count; ++a)
    for (int b = 0; b < level::count; ++b) p_bright[is_bright(a) + is_bright(b)] += prob(rho, a, b);
  const int shots = 20000;
  const auto r = run_sequence(seq, ctx, shots, 77);
  const Estimate est[3] = {r.p0, r.p1, r.p2};
  // Detection errors (decay and Poisson overlap) are below 0.5 %.
  for (int k = 0; k < 3; ++k)
    EXPECT_NEAR(est[k].value, p_bright[k], 4.0 * std::sqrt(0.25 / shots) + 5e-3) << "k=" << k;
  EXPECT_EQ(r.kept, shots);
}

TEST(Sequence, RunsAreReproducible) {
  const auto ctx = quiet_context();
  const std::vector<SequenceStep> seq{carrier(kPi / 2, 0.0, 0.05)};
  const auto a = run_sequence(seq, ctx, 3000, 5);
  const auto b = run_sequence(seq, ctx, 3000, 5);
  const auto c = run_sequence(seq, ctx, 3000, 6);
  EXPECT_EQ(a.p0.value, b.p0.value);
  EXPECT_EQ(a.p1.value, b.p1.value);
  EXPECT_EQ(a.mean_counts, b.mean_counts);
  EXPECT_NE(a.mean_counts, c.mean_counts);
  EXPECT_THROW(run_sequence(seq, ctx, 0, 1), UsageError);
}

TEST(Sequence, IdealBellStateGivesFullParityContrast) {
  const auto ctx = quiet_context();
  SequenceStep ms;
  ms.kind = StepKind::ms_gate;
  ms.label = "MS";
  SequenceStep analysis = carrier(kPi / 2, 0.0, 0.0, "analysis");
  analysis.kind = StepKind::parity_analysis;
  const auto run = run_ensemble({ms}, ctx);
  EXPECT_NEAR(run[0].fidelity, 1.0, 1e-12);
  const auto data = parity_scan({ms}, {analysis}, ctx, uniform_phases(8), 2000, 9);
  const auto fit = fit_parity(data);
  EXPECT_GT(fit.contrast.value, 0.97);
  EXPECT_LT(fit.contrast.value, 1.0 + 4 * fit.contrast.sigma);
  EXPECT_LT(std::abs(fit.offset.value), 0.03);
}

TEST(Sequence, WaitDephasesTheOpticalBellState) {
  auto ctx = quiet_context();
  ctx.noise.b_field_rms = 2e-5;
  ctx.noise.laser_freq_rms = 0.03;
  SequenceStep ms;
  ms.kind = StepKind::ms_gate;
  SequenceStep wait;
  wait.kind = StepKind::wait;
  wait.wait_ms = 2.0;
  const auto run = run_ensemble({ms, wait}, ctx);
  const double sigma = bell_dephasing_rate(ctx.noise, ctx.couplings(), {level::down, level::optical});
  EXPECT_NEAR(run[1].fidelity, 0.5 * (1.0 + std::exp(-0.5 * std::pow(sigma * 2.0, 2))), 1e-12);
}

TEST(Sequence, MapMovesTheBellStateOntoTheClockQubit) {
  const auto ctx = quiet_context();
  SequenceStep ms;
  ms.kind = StepKind::ms_gate;
  ms.label = "MS";
  std::vector<SequenceStep> seq{ms};
  for (const auto& s : map_steps("Map", 0.0)) seq.push_back(s);
  const auto mapped = run_ensemble(seq, ctx).back().rho;
  // |dd> + i|UU>  ->  -|uu> - i|dd>: no optical population is left.
  EXPECT_NEAR(prob(mapped, level::up, level::up), 0.5, 1e-12);
  EXPECT_NEAR(prob(mapped, level::down, level::down), 0.5, 1e-12);
  const Eigen::VectorXcd uu = pair_basis_state(level::up, level::up);
  const Eigen::VectorXcd dd = pair_basis_state(level::down, level::down);
  EXPECT_NEAR(std::abs((dd.adjoint() * mapped * uu)(0, 0)), 0.5, 1e-12);
  for (int a = 0; a < level::count; ++a) {
    EXPECT_NEAR(prob(mapped, level::optical, a), 0.0, 1e-12);
    EXPECT_NEAR(prob(mapped, a, level::optical), 0.0, 1e-12);
  }
  for (const auto& s : map_inverse_steps("Map^-1", 0.0)) seq.push_back(s);
  const auto back = run_ensemble(seq, ctx).back();
  EXPECT_NEAR(prob(back.rho, level::down, level::down), 0.5, 1e-12);
  EXPECT_NEAR(prob(back.rho, level::optical, level::optical), 0.5, 1e-12);
  EXPECT_NEAR(back.fidelity, 1.0, 1e-12);
}

TEST(Sequence, ParityFitRecoversSyntheticFringe) {
  // a cos 2phi + b sin 2phi + c sampled on uniform phases.
  const double a = 0.6, b = -0.5, c = 0.05;
  std::vector<ParityPoint> data;
  for (double ph : uniform_phases(8)) data.push_back({ph, a * std::cos(2 * ph) + b * std::sin(2 * ph) + c, 0.01});
  const auto fit = fit_parity(data);
  EXPECT_NEAR(fit.contrast.value, std::hypot(a, b), 1e-12);
  EXPECT_NEAR(fit.contrast_dft.value, std::hypot(a, b), 1e-12);
  EXPECT_NEAR(fit.offset.value, c, 1e-12);
  EXPECT_NEAR(fit.phase, 0.5 * std::atan2(b, a), 1e-12);
  EXPECT_NEAR(fit.contrast.sigma, 0.01 * std::sqrt(2.0 / 8.0), 1e-12);
  EXPECT_THROW(fit_parity({data[0], data[1]}), UsageError);
}

TEST(Sequence, FidelityEstimateFormula) {
  const auto f = estimate_fidelity(0.48, 0.47, 0.95, 0.004, 0.006);
  EXPECT_NEAR(f.value, 0.5 * 0.95 + 0.5 * 0.95, 1e-15);
  EXPECT_NEAR(f.sigma, 0.5 * std::hypot(0.004, 0.006), 1e-15);
  EXPECT_TRUE(f.consistent);
  EXPECT_FALSE(estimate_fidelity(0.6, 0.5, 1.0, 0.001, 0.001).consistent);
  EXPECT_THROW(estimate_fidelity(1.2, 0.0, 0.5), UsageError);
}

TEST(Sequence, BudgetRowsGroupConsecutiveLabels) {
  const auto ctx = quiet_context();
  std::vector<SequenceStep> seq{carrier(kPi, 0.0, 0.0, "A"), carrier(kPi, 0.0, 0.0, "A"), carrier(kPi / 2, 0.0, 0.0, "B"),
                                carrier(kPi / 2, 0.0, 0.0, "A")};
  seq[2].subtotal = "Sum";
  const auto rows = budget_rows(seq);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0], std::make_pair(std::size_t{0}, std::size_t{1}));
  EXPECT_EQ(rows[2], std::make_pair(std::size_t{3}, std::size_t{3}));
  const auto budget = error_budget(seq, ctx);
  ASSERT_EQ(budget.size(), 4u);
  EXPECT_EQ(budget[2].step, "Sum");
  EXPECT_TRUE(budget[2].summary);
  for (const auto& r : budget) EXPECT_NEAR(r.fidelity, 1.0, 1e-12);
}

TEST(Sequence, ContextCouplings) {
  const auto ctx = quiet_context();
  const auto c = ctx.couplings();
  ASSERT_EQ(c.field.size(), static_cast<std::size_t>(level::count));
  EXPECT_NEAR(c.field[level::down], 1e3 * level_sensitivity(ctx.species, named::down, ctx.field), 1e-9);
  EXPECT_NEAR(c.field[level::optical], 1e3 * level_sensitivity(ctx.species, named::upsilon, ctx.field), 1e-9);
  EXPECT_EQ(c.laser[level::down], 0.0);
  EXPECT_EQ(c.laser[level::optical], 1.0);
}

}  // namespace
