#include "ca43/noise.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <random>

#include "ca43/errors.hpp"

namespace ca43 {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

void check_couplings(const LevelCouplings& c, int local_dim) {
  if (static_cast<int>(c.field.size()) != local_dim || static_cast<int>(c.laser.size()) != local_dim)
    throw UsageError("level couplings do not match the local dimension");
}

}  // namespace

void NoiseModel::validate() const {
  if (!(b_field_rms >= 0.0) || !(laser_freq_rms >= 0.0) || !(laser_linewidth >= 0.0))
    throw ConfigError("noise rms values must be >= 0");
  if (!(excess_error_per_gate >= 0.0 && excess_error_per_gate <= 1.0))
    throw ConfigError("excess_error_per_gate must lie in [0, 1]");
}

double laser_rms_from_linewidth(double fwhm_hz, double fiber_multiplier) {
  return fwhm_hz / (2.0 * std::sqrt(2.0 * std::log(2.0))) * fiber_multiplier * 1e-3;
}

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t shot, std::uint64_t stream) {
  return splitmix64(splitmix64(splitmix64(seed) ^ shot) ^ (stream * 0xd1b54a32d192ed03ULL));
}

ShotOffsets sample_shot_offsets(const NoiseModel& noise, std::uint64_t shot, std::uint64_t stream) {
  ShotOffsets out;
  if (noise.b_field_rms == 0.0 && noise.laser_freq_rms == 0.0) return out;
  std::mt19937_64 rng(stream_seed(noise.rng_seed, shot, stream));
  std::normal_distribution<double> normal(0.0, 1.0);
  const double zb = normal(rng);
  const double zl = normal(rng);
  out.field = noise.b_field_rms * zb;
  out.laser = noise.laser_freq_rms * zl;
  return out;
}

LevelCouplings qubit_couplings(const IonSpecies& species, const NamedQubit& qubit, double field) {
  LevelCouplings c;
  for (const auto& label : {qubit.lower, qubit.upper}) {
    c.field.push_back(level_sensitivity(species, label, field) * 1e3);
    c.laser.push_back(label.manifold == Manifold::D52 ? 1.0 : 0.0);
  }
  return c;
}

JointState apply_dephasing(const JointState& state, double t_ms, const NoiseModel& noise,
                           const LevelCouplings& couplings) {
  const int d = state.local_dim();
  check_couplings(couplings, d);
  if (t_ms == 0.0) return state;
  const int nf = state.fock_dim();
  const double vb = std::pow(kTwoPi * t_ms * noise.b_field_rms, 2);
  const double vl = std::pow(kTwoPi * t_ms * noise.laser_freq_rms, 2);
  std::vector<double> s(d * d), l(d * d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) {
      s[a * d + b] = couplings.field[a] + couplings.field[b];
      l[a * d + b] = couplings.laser[a] + couplings.laser[b];
    }
  JointState out = state;
  auto& rho = out.rho();
  for (int x = 0; x < rho.rows(); ++x)
    for (int y = 0; y < rho.cols(); ++y) {
      const int px = x / nf, py = y / nf;
      const double ds = s[px] - s[py], dl = l[px] - l[py];
      if (ds == 0.0 && dl == 0.0) continue;
      rho(x, y) *= std::exp(-0.5 * (ds * ds * vb + dl * dl * vl));
    }
  return out;
}

JointState apply_dephasing(const JointState& state, double t_ms, const NoiseModel& noise, const IonSpecies& species,
                           const NamedQubit& qubit, double field) {
  if (state.local_dim() != 2) throw UsageError("apply_dephasing: named-qubit form expects a two-level local basis");
  return apply_dephasing(state, t_ms, noise, qubit_couplings(species, qubit, field));
}

Eigen::VectorXcd shot_phases(const LevelCouplings& c, const ShotOffsets& o, double t_ms) {
  const int d = static_cast<int>(c.field.size());
  Eigen::VectorXcd single(d);
  for (int k = 0; k < d; ++k)
    single(k) = std::polar(1.0, -kTwoPi * (c.field[k] * o.field + c.laser[k] * o.laser) * t_ms);
  Eigen::VectorXcd pair(d * d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) pair(a * d + b) = single(a) * single(b);
  return pair;
}

double bell_dephasing_rate(const NoiseModel& noise, const LevelCouplings& c, QubitIndices q) {
  const double ds = 2.0 * (c.field.at(q.upper) - c.field.at(q.lower));
  const double dl = 2.0 * (c.laser.at(q.upper) - c.laser.at(q.lower));
  return kTwoPi * std::sqrt(ds * ds * noise.b_field_rms * noise.b_field_rms +
                            dl * dl * noise.laser_freq_rms * noise.laser_freq_rms);
}

std::vector<double> contrast_curve(const NoiseModel& noise, const LevelCouplings& c, const std::vector<double>& times,
                                   QubitIndices q) {
  const double sigma = bell_dephasing_rate(noise, c, q);
  std::vector<double> out;
  out.reserve(times.size());
  for (double t : times) out.push_back(std::exp(-0.5 * sigma * sigma * t * t));
  return out;
}

std::vector<double> contrast_curve_mc(const NoiseModel& noise, const LevelCouplings& c,
                                      const std::vector<double>& times, int shots, QubitIndices q) {
  if (shots <= 0) throw UsageError("contrast_curve_mc: shots must be positive");
  const double ds = 2.0 * (c.field.at(q.upper) - c.field.at(q.lower));
  const double dl = 2.0 * (c.laser.at(q.upper) - c.laser.at(q.lower));
  std::vector<double> out;
  for (std::size_t k = 0; k < times.size(); ++k) {
    double sum = 0.0;
    for (int s = 0; s < shots; ++s) {
      const auto o = sample_shot_offsets(noise, static_cast<std::uint64_t>(s), k);
      sum += std::cos(kTwoPi * (ds * o.field + dl * o.laser) * times[k]);
    }
    out.push_back(sum / shots);
  }
  return out;
}

double analytic_t_half(const NoiseModel& noise, const LevelCouplings& c, QubitIndices q) {
  const double sigma = bell_dephasing_rate(noise, c, q);
  if (sigma == 0.0) return std::numeric_limits<double>::infinity();
  return std::sqrt(2.0 * std::log(2.0)) / sigma;
}

DecayFit fit_gaussian_decay(const std::vector<DecaySample>& samples) {
  DecayFit fit;
  const int n = static_cast<int>(samples.size());
  if (n < 3) {
    fit.diagnostics = "need at least 3 samples";
    return fit;
  }
  double t_max = 0.0;
  for (const auto& s : samples) {
    if (!(s.sigma > 0.0) || !std::isfinite(s.value) || !std::isfinite(s.t)) {
      fit.diagnostics = "samples need finite values and positive sigma";
      return fit;
    }
    t_max = std::max(t_max, std::abs(s.t));
  }
  if (t_max == 0.0) {
    fit.diagnostics = "all samples at t = 0";
    return fit;
  }

  // Parameters (c0, k) with model c0 exp(-k t^2); k = 1/tau^2 >= 0.
  auto model = [](double c0, double k, double t) { return c0 * std::exp(-k * t * t); };
  auto chi2 = [&](double c0, double k) {
    double s = 0.0;
    for (const auto& p : samples) s += std::pow((p.value - model(c0, k, p.t)) / p.sigma, 2);
    return s;
  };

  // Start from a log-linear fit over positive points.
  double c0 = 0.0, k = 0.0;
  {
    double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& p : samples) {
      if (p.value <= 0.0) continue;
      const double w = std::pow(p.value / p.sigma, 2);
      const double x = p.t * p.t, y = std::log(p.value);
      sw += w; sx += w * x; sy += w * y; sxx += w * x * x; sxy += w * x * y;
    }
    const double det = sw * sxx - sx * sx;
    if (sw > 0.0 && std::abs(det) > 1e-300) {
      const double slope = (sw * sxy - sx * sy) / det;
      c0 = std::exp((sy - slope * sx) / sw);
      k = std::max(0.0, -slope);
    } else {
      c0 = samples.front().value;
      k = 1.0 / (t_max * t_max);
    }
  }

  double lambda = 1e-3;
  double current = chi2(c0, k);
  bool converged = false;
  int it = 0;
  for (; it < 500; ++it) {
    Eigen::Matrix2d jtj = Eigen::Matrix2d::Zero();
    Eigen::Vector2d jtr = Eigen::Vector2d::Zero();
    for (const auto& p : samples) {
      const double e = std::exp(-k * p.t * p.t);
      const double w = 1.0 / (p.sigma * p.sigma);
      const Eigen::Vector2d j(e, -p.t * p.t * c0 * e);
      jtj += w * j * j.transpose();
      jtr += w * j * (p.value - c0 * e);
    }
    Eigen::Matrix2d a = jtj;
    a.diagonal() *= (1.0 + lambda);
    const Eigen::Vector2d step = a.ldlt().solve(jtr);
    double c0n = c0 + step(0), kn = std::max(0.0, k + step(1));
    const double cand = chi2(c0n, kn);
    if (cand <= current) {
      const double rel = (current - cand) / std::max(current, 1e-300);
      c0 = c0n;
      k = kn;
      current = cand;
      lambda = std::max(lambda / 10.0, 1e-12);
      if (rel < 1e-14 || step.norm() < 1e-15 * (1.0 + std::abs(c0) + std::abs(k))) {
        converged = true;
        break;
      }
    } else {
      lambda *= 10.0;
      if (lambda > 1e12) {
        converged = true;  // no downhill step left: at a (boundary) minimum
        break;
      }
    }
  }
  fit.iterations = it;

  Eigen::Matrix2d jtj = Eigen::Matrix2d::Zero();
  double rss = 0.0;
  for (const auto& p : samples) {
    const double e = std::exp(-k * p.t * p.t);
    const Eigen::Vector2d j(e, -p.t * p.t * c0 * e);
    jtj += j * j.transpose() / (p.sigma * p.sigma);
    rss += std::pow(p.value - c0 * e, 2);
  }
  fit.ok = converged && std::isfinite(c0) && std::isfinite(k);
  fit.c0 = c0;
  fit.chi2 = current;
  fit.residual_rms = std::sqrt(rss / n);
  if (!fit.ok) {
    fit.diagnostics = "fit did not converge after " + std::to_string(it) + " iterations";
    return fit;
  }
  const Eigen::Matrix2d cov = jtj.inverse();
  fit.c0_sigma = std::sqrt(std::max(0.0, cov(0, 0)));
  const double k_sigma = std::sqrt(std::max(0.0, cov(1, 1)));
  const bool resolved = k > 0.0 && k * t_max * t_max > 1e-9 && std::isfinite(k_sigma) && k > 2.0 * k_sigma;
  if (!resolved) {
    fit.diagnostics = "decay constant not identifiable (k = " + std::to_string(k) + " +- " +
                      std::to_string(k_sigma) + " per ms^2)";
    return fit;
  }
  fit.identifiable = true;
  fit.tau = 1.0 / std::sqrt(k);
  fit.t_half = fit.tau * std::sqrt(std::log(2.0));
  fit.tau_sigma = 0.5 * std::pow(k, -1.5) * k_sigma;
  if (t_max < 0.5 * fit.t_half) fit.diagnostics = "no sample beyond t_half/2; tau extrapolated";
  if (fit.c0 < 0.0 || fit.c0 > 1.05) fit.diagnostics += (fit.diagnostics.empty() ? "" : "; ") + std::string("c0 outside [0, 1.05]");
  return fit;
}

NoiseModel calibrate_noise(const IonSpecies& species, double field, double t_half_optical_ms,
                           double t_half_hyperfine_ms) {
  if (!(t_half_optical_ms > 0.0) || !(t_half_hyperfine_ms > 0.0)) throw UsageError("half-lives must be positive");
  const double root = std::sqrt(2.0 * std::log(2.0));
  const auto hf = qubit_couplings(species, hyperfine_qubit(), field);
  const auto opt = qubit_couplings(species, optical_qubit(), field);
  const double s_hf = std::abs(hf.field[1] - hf.field[0]);
  const double s_opt = std::abs(opt.field[1] - opt.field[0]);
  NoiseModel noise;
  // Bell rate = 2 pi * 2 * sqrt((s b)^2 + L^2)
  noise.b_field_rms = root / (t_half_hyperfine_ms * kTwoPi * 2.0 * s_hf);
  const double total = root / (t_half_optical_ms * kTwoPi * 2.0);
  const double field_part = s_opt * noise.b_field_rms;
  if (total < field_part)
    throw ConfigError("optical half-life longer than the field noise alone allows; no laser rms fits");
  noise.laser_freq_rms = std::sqrt(total * total - field_part * field_part);
  return noise;
}

}  // namespace ca43
