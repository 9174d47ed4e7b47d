#include "ca43/ac_stark.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <numbers>

#include "ca43/errors.hpp"

namespace ca43 {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double tone_detuning_khz(const BichromaticPulse& pulse, const MotionalMode& mode) {
  return mode.frequency * 1e3 + pulse.detuning_delta;
}

double line_shift(const StarkLine& line, double omega, double tone_detuning_khz) {
  const double w = line.relative_rabi * omega;
  const double d = tone_detuning_khz - line.offset * 1e3;
  if (d == 0.0) throw UsageError("stark shift: tone resonant with " + line.lower.str() + "->" + line.upper.str());
  return -w * w / (4.0 * d);
}

double far_shift(const BichromaticPulse& pulse, const MotionalMode& mode, const StarkContext& ctx, bool far_only) {
  const double big = tone_detuning_khz(pulse, mode);
  const double wb = pulse.omega_blue * pulse.coupling_scale, wr = pulse.omega_red * pulse.coupling_scale;
  double s = 0.0;
  for (const auto& line : ctx.lines) {
    if (far_only && std::abs(line.offset) <= ctx.numeric_window) continue;
    s += line_shift(line, wb, big) + line_shift(line, wr, -big);
  }
  s += ctx.dipole_coefficient * 0.5 * (wb * wb + wr * wr);
  return s + pulse.static_shift;
}

}  // namespace

StarkContext stark_context(const IonSpecies& species, double field, const BeamGeometry& beam,
                           const LevelLabel& lower, const LevelLabel& upper, double dipole_coefficient) {
  StarkContext ctx;
  ctx.dipole_coefficient = dipole_coefficient;
  const double ref = relative_rabi(species, lower, upper, beam, field);
  if (ref == 0.0) throw UsageError("stark_context: the qubit line is not driven by this beam");
  for (const auto& l : neighborhood(species, lower, upper, beam, field)) {
    if (l.strength == 0.0) continue;
    StarkLine s;
    s.lower = l.lower;
    s.upper = l.upper;
    s.offset = l.offset;
    s.relative_rabi = l.strength / ref;
    s.shares_lower = l.lower == lower;
    ctx.lines.push_back(s);
  }
  return ctx;
}

double imbalance_stark_shift(const BichromaticPulse& pulse, const MotionalMode& mode) {
  const double wb = pulse.omega_blue * pulse.coupling_scale, wr = pulse.omega_red * pulse.coupling_scale;
  return (wr * wr - wb * wb) / (2.0 * tone_detuning_khz(pulse, mode));
}

double external_stark_shift(const BichromaticPulse& pulse, const MotionalMode& mode, const StarkContext& context) {
  return far_shift(pulse, mode, context, false);
}

double ac_stark_shift(const BichromaticPulse& pulse, const MotionalMode& mode, const StarkContext& context) {
  return imbalance_stark_shift(pulse, mode) + external_stark_shift(pulse, mode, context);
}

BichromaticPulse with_compensation(BichromaticPulse pulse, const Compensation& c) {
  pulse.omega_red = c.omega_red;
  pulse.omega_blue = c.omega_blue;
  return pulse;
}

namespace {

Compensation from_ratio(double r, double mean, bool ok) {
  Compensation c;
  c.compensable = ok;
  c.ratio = r;
  c.omega_red = 2.0 * mean / (1.0 + r);
  c.omega_blue = r * c.omega_red;
  return c;
}

}  // namespace

Compensation compensation_ratio(double shift_khz, const BichromaticPulse& pulse, const MotionalMode& mode) {
  const double mean = pulse.mean_omega();
  if (shift_khz == 0.0) return from_ratio(1.0, mean, true);
  if (mean == 0.0) return from_ratio(1.0, mean, false);
  const double w = mean * pulse.coupling_scale;
  const double u = shift_khz * tone_detuning_khz(pulse, mode) / (2.0 * w * w);
  if (std::abs(u) >= 1.0) return from_ratio(1.0, mean, false);
  const double r = (1.0 + u) / (1.0 - u);
  return from_ratio(r, mean, r >= 0.5 && r <= 2.0);
}

Compensation compensate(const BichromaticPulse& pulse, const MotionalMode& mode, const StarkContext& context) {
  const double mean = pulse.mean_omega();
  auto total = [&](double r) { return ac_stark_shift(with_compensation(pulse, from_ratio(r, mean, true)), mode, context); };
  double lo = 0.5, hi = 2.0;
  double f_lo = total(lo), f_hi = total(hi);
  if (f_lo == 0.0) return from_ratio(lo, mean, true);
  if (f_hi == 0.0) return from_ratio(hi, mean, true);
  if ((f_lo < 0.0) == (f_hi < 0.0)) return from_ratio(1.0, mean, false);
  for (int k = 0; k < 200 && hi - lo > 1e-13; ++k) {
    const double mid = 0.5 * (lo + hi);
    const double f = total(mid);
    if ((f < 0.0) == (f_lo < 0.0)) {
      lo = mid;
      f_lo = f;
    } else {
      hi = mid;
    }
  }
  return from_ratio(0.5 * (lo + hi), mean, true);
}

double calibrate_dipole_coefficient(const BichromaticPulse& pulse, const MotionalMode& mode,
                                    const StarkContext& context, double target_khz) {
  StarkContext zero = context;
  zero.dipole_coefficient = 0.0;
  const double wb = pulse.omega_blue * pulse.coupling_scale, wr = pulse.omega_red * pulse.coupling_scale;
  const double msq = 0.5 * (wb * wb + wr * wr);
  if (msq == 0.0) throw UsageError("calibrate_dipole_coefficient: zero coupling");
  return (target_khz - external_stark_shift(pulse, mode, zero)) / msq;
}

double numeric_stark_shift(const BichromaticPulse& pulse, const MotionalMode& mode, const StarkContext& context) {
  using Mat = Eigen::MatrixXcd;
  // Local levels: 0 = lower, 1 = upper, then one per explicit spectator line.
  std::vector<const StarkLine*> near;
  for (const auto& l : context.lines)
    if (std::abs(l.offset) <= context.numeric_window) near.push_back(&l);
  const int d = 2 + static_cast<int>(near.size());

  const double big = kTwoPi * tone_detuning_khz(pulse, mode) * 1e-3;  // rad/us
  const double wb = kTwoPi * pulse.omega_blue * pulse.coupling_scale * 1e-3;
  const double wr = kTwoPi * pulse.omega_red * pulse.coupling_scale * 1e-3;
  const cplx i(0.0, 1.0);
  const cplx tone_phase = std::exp(i * (pulse.phase - 0.5 * std::numbers::pi));

  Mat h_static = Mat::Zero(d, d);
  h_static(1, 1) = kTwoPi * far_shift(pulse, mode, context, true) * 1e-3;
  // Raising operators weighted by relative strength.
  Mat raise = Mat::Zero(d, d);
  raise(1, 0) = 1.0;
  for (int k = 0; k < static_cast<int>(near.size()); ++k) {
    const int s = 2 + k;
    const double f = kTwoPi * near[k]->offset;
    if (near[k]->shares_lower) {
      h_static(s, s) = f;
      raise(s, 0) = near[k]->relative_rabi;
    } else {
      h_static(s, s) = -f;
      raise(1, s) = near[k]->relative_rabi;
    }
  }
  // H(t) = H_s + [ (wb/2) e^{-i big t} + (wr/2) e^{+i big t} ] p R + h.c.
  auto apply = [&](double t, const Mat& u) -> Mat {
    const cplx c = tone_phase * (0.5 * wb * std::exp(-i * big * t) + 0.5 * wr * std::exp(i * big * t));
    const Mat h = h_static + c * raise + std::conj(c) * raise.adjoint();
    return -i * (h * u);
  };

  const double period = kTwoPi / big;
  double f_max = big;
  for (int k = 0; k < d; ++k) f_max = std::max(f_max, std::abs(h_static(k, k).real()));
  const double norm = h_static.cwiseAbs().maxCoeff() + 0.5 * (wb + wr) * (1.0 + raise.cwiseAbs().sum());
  double dt = std::min(kTwoPi / (200.0 * f_max), 0.02 / norm);
  const int steps = static_cast<int>(std::ceil(period / dt));
  dt = period / steps;

  Mat u = Mat::Identity(d, d);
  for (int s = 0; s < steps; ++s) {
    const double t = s * dt;
    const Mat k1 = apply(t, u);
    const Mat k2 = apply(t + 0.5 * dt, u + 0.5 * dt * k1);
    const Mat k3 = apply(t + 0.5 * dt, u + 0.5 * dt * k2);
    const Mat k4 = apply(t + dt, u + dt * k3);
    u += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  Eigen::ComplexEigenSolver<Mat> solver(u);
  auto quasi = [&](int bare) {
    Eigen::Index best = 0;
    solver.eigenvectors().row(bare).cwiseAbs().maxCoeff(&best);
    return -std::arg(solver.eigenvalues()(best)) / period;  // rad/us
  };
  double diff = quasi(1) - quasi(0);
  const double zone = kTwoPi / period;
  diff -= zone * std::round(diff / zone);
  return diff / kTwoPi * 1e3;
}

}  // namespace ca43
