#include "ca43/coupling_spectrum.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <tuple>

#include "ca43/angular.hpp"
#include "ca43/errors.hpp"

namespace ca43 {

namespace {

using cplx = std::complex<double>;
using Vec3 = std::array<cplx, 3>;

// Spherical components e_q^* . a for q = -1, 0, +1 (index q + 1).
std::array<cplx, 3> spherical(const Vec3& a) {
  const double s = 1.0 / std::sqrt(2.0);
  const cplx i(0.0, 1.0);
  return {s * (a[0] + i * a[1]), a[2], -s * (a[0] - i * a[1])};
}

// Rank-2 part of the tensor product of polarization and wavevector.
std::array<cplx, 5> rank2(const Vec3& eps, const Vec3& n) {
  const auto e = spherical(eps);
  const auto k = spherical(n);
  std::array<cplx, 5> t{};
  for (int q = -2; q <= 2; ++q)
    for (int q1 = -1; q1 <= 1; ++q1) {
      const int q2 = q - q1;
      if (q2 < -1 || q2 > 1) continue;
      t[q + 2] += angular::clebsch_gordan(2, 2 * q1, 2, 2 * q2, 4, 2 * q) * e[q1 + 1] * k[q2 + 1];
    }
  return t;
}

std::array<double, 5> ideal_factors(const BeamGeometry& beam) {
  const double th = beam.angle_k_to_B;
  const Vec3 n{std::sin(th), 0.0, std::cos(th)};
  const Vec3 e1{std::cos(th), 0.0, -std::sin(th)};
  const Vec3 e2{0.0, 1.0, 0.0};
  Vec3 eps{};
  const double s = 1.0 / std::sqrt(2.0);
  const cplx i(0.0, 1.0);
  for (int c = 0; c < 3; ++c) {
    switch (beam.polarization) {
      case Polarization::sigma_plus: eps[c] = -s * (e1[c] + i * e2[c]); break;
      case Polarization::sigma_minus: eps[c] = s * (e1[c] - i * e2[c]); break;
      case Polarization::linear: eps[c] = std::cos(beam.gamma) * e1[c] + std::sin(beam.gamma) * e2[c]; break;
    }
  }
  const auto t = rank2(eps, n);
  std::array<double, 5> g{};
  const double norm = std::sqrt(2.0 / 3.0);
  for (int q = 0; q < 5; ++q) g[q] = norm * std::abs(t[q]);
  return g;
}

struct LevelSets {
  std::vector<ZeemanLevel> s;
  std::vector<ZeemanLevel> d;
};

LevelSets levels_for(const IonSpecies& species, double field) {
  ZeemanTracker ts(species, Manifold::S12);
  ZeemanTracker td(species, Manifold::D52);
  return {ts.levels_at(field), td.levels_at(field)};
}

long long offset_key(double offset) { return std::llround(offset * 1e9); }

bool line_less(const TransitionLine& a, const TransitionLine& b) {
  return std::make_tuple(offset_key(a.offset), a.delta_m, a.upper.F, a.upper.mF, a.lower.F, a.lower.mF,
                         static_cast<int>(a.tag)) <
         std::make_tuple(offset_key(b.offset), b.delta_m, b.upper.F, b.upper.mF, b.lower.F, b.lower.mF,
                         static_cast<int>(b.tag));
}

}  // namespace

std::string_view to_string(BeamId id) {
  switch (id) {
    case BeamId::beam1: return "beam1";
    case BeamId::beam2: return "beam2";
    case BeamId::custom: return "custom";
  }
  return "custom";
}

BeamId parse_beam(std::string_view text) {
  if (text == "beam1") return BeamId::beam1;
  if (text == "beam2") return BeamId::beam2;
  if (text == "custom") return BeamId::custom;
  throw ConfigError("unknown beam '" + std::string(text) + "'");
}

Polarization parse_polarization(std::string_view text) {
  if (text == "sigma_plus") return Polarization::sigma_plus;
  if (text == "sigma_minus") return Polarization::sigma_minus;
  if (text == "linear") return Polarization::linear;
  throw ConfigError("unknown polarization '" + std::string(text) + "'");
}

std::string_view to_string(SidebandTag tag) {
  switch (tag) {
    case SidebandTag::carrier: return "carrier";
    case SidebandTag::axial_red: return "axial_red";
    case SidebandTag::axial_blue: return "axial_blue";
    case SidebandTag::micromotional: return "micromotional";
  }
  return "carrier";
}

BeamGeometry BeamGeometry::beam1(double impurity) {
  BeamGeometry b;
  b.id = BeamId::beam1;
  b.angle_k_to_B = 0.0;
  b.polarization = Polarization::sigma_plus;
  b.impurity = impurity;
  return b;
}

BeamGeometry BeamGeometry::beam2(double impurity) {
  BeamGeometry b;
  b.id = BeamId::beam2;
  b.angle_k_to_B = std::numbers::pi / 2.0;
  b.polarization = Polarization::linear;
  b.gamma = std::numbers::pi / 2.0;
  b.impurity = impurity;
  return b;
}

void BeamGeometry::validate() const {
  if (!(impurity >= 0.0 && impurity <= 0.2)) throw ConfigError("beam impurity must lie in [0, 0.2]");
  if (!std::isfinite(angle_k_to_B) || !std::isfinite(angle_k_to_axis) || !std::isfinite(gamma))
    throw ConfigError("beam angles must be finite");
}

double ideal_geometry_factor(int delta_m, const BeamGeometry& beam) {
  if (std::abs(delta_m) > 2) throw UsageError("geometry factor: |delta_m| must be <= 2");
  return ideal_factors(beam)[delta_m + 2];
}

double geometry_factor(int delta_m, const BeamGeometry& beam) {
  if (std::abs(delta_m) > 2) throw UsageError("geometry factor: |delta_m| must be <= 2");
  const auto g = ideal_factors(beam);
  const double gmax = *std::max_element(g.begin(), g.end());
  const double ideal = g[delta_m + 2];
  if (ideal > 1e-12 * gmax) return ideal;
  return beam.impurity * gmax;
}

double quadrupole_amplitude(const ZeemanLevel& s, const ZeemanLevel& d) {
  if (s.manifold != Manifold::S12 || d.manifold != Manifold::D52)
    throw UsageError("quadrupole_amplitude: expects an S1/2 and a D5/2 level");
  if (s.field != d.field) throw UsageError("quadrupole_amplitude: levels computed at different fields");
  const int q = d.mF - s.mF;
  if (std::abs(q) > 2) return 0.0;
  const int ns = static_cast<int>(s.eigenvector.size());
  const int nd = static_cast<int>(d.eigenvector.size());
  const int dim_i = ns / 2;
  if (nd != dim_i * 6) throw UsageError("quadrupole_amplitude: eigenvector dimensions do not match");
  double amp = 0.0;
  for (int im = 0; im < dim_i; ++im)
    for (int js = 0; js < 2; ++js) {
      const double cs = s.eigenvector(im * 2 + js);
      if (cs == 0.0) continue;
      const int two_mj = 1 - 2 * js;
      const int two_mjd = two_mj + 2 * q;
      if (std::abs(two_mjd) > 5) continue;
      const int jd = (5 - two_mjd) / 2;
      const double cd = d.eigenvector(im * 6 + jd);
      if (cd == 0.0) continue;
      amp += cs * cd * angular::clebsch_gordan(1, two_mj, 4, 2 * q, 5, two_mjd);
    }
  return amp;
}

double line_strength(const ZeemanLevel& s, const ZeemanLevel& d, const BeamGeometry& beam) {
  const int dm = d.mF - s.mF;
  if (std::abs(dm) > 2) return 0.0;
  return std::abs(quadrupole_amplitude(s, d)) * geometry_factor(dm, beam);
}

std::vector<TransitionLine> spectrum(const IonSpecies& species, const SpectrumOptions& options) {
  if (!(options.span > 0.0)) throw UsageError("spectrum: span must be positive");
  options.beam.validate();
  const auto lv = levels_for(species, options.field);
  const auto& ref_s = find_level(lv.s, options.reference_lower);
  const auto& ref_d = find_level(lv.d, options.reference_upper);
  const double ref_freq = ref_d.energy - ref_s.energy;

  std::vector<TransitionLine> lines;
  double strongest = 0.0;
  for (const auto& s : lv.s) {
    if (options.lower_F && s.F != *options.lower_F) continue;
    for (const auto& d : lv.d) {
      if (options.upper_F && d.F != *options.upper_F) continue;
      const int dm = d.mF - s.mF;
      if (std::abs(dm) > 2) continue;
      const double offset = (d.energy - s.energy) - ref_freq;
      if (std::abs(offset) > 0.5 * options.span) continue;
      TransitionLine line;
      line.lower = s.label();
      line.upper = d.label();
      line.delta_m = dm;
      line.offset = offset;
      line.strength = line_strength(s, d, options.beam);
      strongest = std::max(strongest, line.strength);
      lines.push_back(line);
    }
  }
  if (strongest > 0.0)
    for (auto& l : lines) l.relative_rabi = l.strength / strongest;

  if (options.include_sidebands) {
    auto marker = [&](double offset, SidebandTag tag) {
      if (std::abs(offset) > 0.5 * options.span) return;
      TransitionLine m;
      m.lower = options.reference_lower;
      m.upper = options.reference_upper;
      m.delta_m = options.reference_upper.mF - options.reference_lower.mF;
      m.offset = offset;
      m.tag = tag;
      lines.push_back(m);
    };
    marker(-options.axial_frequency, SidebandTag::axial_red);
    marker(options.axial_frequency, SidebandTag::axial_blue);
    marker(-options.micromotion_frequency, SidebandTag::micromotional);
    marker(options.micromotion_frequency, SidebandTag::micromotional);
  }
  std::sort(lines.begin(), lines.end(), line_less);
  return lines;
}

double relative_rabi(const IonSpecies& species, const LevelLabel& lower, const LevelLabel& upper,
                     const BeamGeometry& beam, double field) {
  const auto lv = levels_for(species, field);
  return line_strength(find_level(lv.s, lower), find_level(lv.d, upper), beam);
}

double suppression_ratio(const IonSpecies& species, const LevelLabel& main_lower, const LevelLabel& main_upper,
                         const LevelLabel& other_lower, const LevelLabel& other_upper, const BeamGeometry& beam,
                         double field) {
  const auto lv = levels_for(species, field);
  const double main = line_strength(find_level(lv.s, main_lower), find_level(lv.d, main_upper), beam);
  const double other = line_strength(find_level(lv.s, other_lower), find_level(lv.d, other_upper), beam);
  if (other == 0.0) return std::numeric_limits<double>::infinity();
  return main / other;
}

std::vector<TransitionLine> neighborhood(const IonSpecies& species, const LevelLabel& ref_lower,
                                         const LevelLabel& ref_upper, const BeamGeometry& beam, double field) {
  const auto lv = levels_for(species, field);
  const auto& rs = find_level(lv.s, ref_lower);
  const auto& rd = find_level(lv.d, ref_upper);
  const double ref_freq = rd.energy - rs.energy;
  std::vector<TransitionLine> out;
  auto add = [&](const ZeemanLevel& s, const ZeemanLevel& d) {
    const int dm = d.mF - s.mF;
    if (std::abs(dm) > 2) return;
    TransitionLine l;
    l.lower = s.label();
    l.upper = d.label();
    l.delta_m = dm;
    l.offset = (d.energy - s.energy) - ref_freq;
    l.strength = line_strength(s, d, beam);
    out.push_back(l);
  };
  for (const auto& d : lv.d)
    if (!(d.label() == ref_upper)) add(rs, d);
  for (const auto& s : lv.s)
    if (!(s.label() == ref_lower)) add(s, rd);
  std::sort(out.begin(), out.end(), line_less);
  return out;
}

double calibrate_impurity(const IonSpecies& species, const LevelLabel& ref_lower, const LevelLabel& ref_upper,
                          BeamGeometry beam, double field, double target) {
  if (!(target > 0.0)) throw UsageError("calibrate_impurity: target must be positive");
  const int ref_dm = ref_upper.mF - ref_lower.mF;
  beam.impurity = 1.0;  // strengths of forbidden channels then equal |A| * gmax
  const auto lv = levels_for(species, field);
  const double ref = line_strength(find_level(lv.s, ref_lower), find_level(lv.d, ref_upper), beam);
  double worst = 0.0;
  for (const auto& l : neighborhood(species, ref_lower, ref_upper, beam, field)) {
    if (l.delta_m == ref_dm) continue;
    worst = std::max(worst, l.strength);
  }
  if (worst == 0.0) return 0.0;
  return ref / (target * worst);
}

double adjacent_zeeman_splitting(const IonSpecies& species, int F, int mF, double field) {
  ZeemanTracker ts(species, Manifold::S12);
  const auto levels = ts.levels_at(field);
  const auto& a = find_level(levels, {Manifold::S12, F, mF});
  const auto& b = find_level(levels, {Manifold::S12, F, mF + 1});
  return std::abs(b.energy - a.energy);
}

std::vector<Coincidence> coincidence_report(const IonSpecies& species, double field, double axial_frequency,
                                            const CoincidenceOptions& options) {
  std::vector<Coincidence> out;
  if (!(options.threshold > 0.0)) return out;

  ZeemanTracker ts(species, Manifold::S12);
  const auto s_levels = ts.levels_at(field);
  const int F = options.reference_lower.F;
  for (int m = -F; m < F; ++m) {
    const auto& a = find_level(s_levels, {Manifold::S12, F, m});
    const auto& b = find_level(s_levels, {Manifold::S12, F, m + 1});
    const double gap = std::abs(std::abs(b.energy - a.energy) - axial_frequency);
    if (gap < options.threshold) {
      Coincidence c;
      c.description = "zeeman splitting " + a.label().str() + "-" + b.label().str() + " vs axial frequency";
      c.carrier.lower = a.label();
      c.carrier.upper = b.label();
      c.carrier.offset = b.energy - a.energy;
      c.sideband = "axial";
      c.gap = gap;
      out.push_back(c);
    }
  }

  for (const auto& line : neighborhood(species, options.reference_lower, options.reference_upper, options.beam, field)) {
    if (line.strength == 0.0) continue;
    for (int sign : {-1, 1}) {
      const double gap = std::abs(line.offset - sign * axial_frequency);
      if (gap < options.threshold) {
        Coincidence c;
        c.description = "carrier " + line.lower.str() + "->" + line.upper.str() + " vs " +
                        (sign < 0 ? "red" : "blue") + " sideband of reference";
        c.carrier = line;
        c.sideband = sign < 0 ? "red" : "blue";
        c.gap = gap;
        out.push_back(c);
      }
    }
  }
  std::sort(out.begin(), out.end(), [](const Coincidence& a, const Coincidence& b) {
    return std::tie(a.gap, a.description) < std::tie(b.gap, b.description);
  });
  return out;
}

}  // namespace ca43
