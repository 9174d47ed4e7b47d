#include "ca43/angular.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

namespace ca43::angular {

namespace {

double log_factorial(int n) { return std::lgamma(static_cast<double>(n) + 1.0); }

bool triangle_ok(int a, int b, int c) {
  return c >= std::abs(a - b) && c <= a + b && ((a + b + c) % 2 == 0);
}

}  // namespace

double wigner_3j(int two_j1, int two_j2, int two_j3, int two_m1, int two_m2, int two_m3) {
  if (two_m1 + two_m2 + two_m3 != 0) return 0.0;
  if (!triangle_ok(two_j1, two_j2, two_j3)) return 0.0;
  if (std::abs(two_m1) > two_j1 || std::abs(two_m2) > two_j2 || std::abs(two_m3) > two_j3) return 0.0;
  if ((two_j1 + two_m1) % 2 != 0 || (two_j2 + two_m2) % 2 != 0 || (two_j3 + two_m3) % 2 != 0) return 0.0;

  // Racah formula in integer (non-doubled) quantities.
  const int a = (two_j1 + two_j2 - two_j3) / 2;
  const int b = (two_j1 - two_j2 + two_j3) / 2;
  const int c = (-two_j1 + two_j2 + two_j3) / 2;
  const int d = (two_j1 + two_j2 + two_j3) / 2 + 1;
  const int j1pm1 = (two_j1 + two_m1) / 2, j1mm1 = (two_j1 - two_m1) / 2;
  const int j2pm2 = (two_j2 + two_m2) / 2, j2mm2 = (two_j2 - two_m2) / 2;
  const int j3pm3 = (two_j3 + two_m3) / 2, j3mm3 = (two_j3 - two_m3) / 2;

  const double log_delta =
      0.5 * (log_factorial(a) + log_factorial(b) + log_factorial(c) - log_factorial(d));
  const double log_prefactor = 0.5 * (log_factorial(j1pm1) + log_factorial(j1mm1) + log_factorial(j2pm2) +
                                      log_factorial(j2mm2) + log_factorial(j3pm3) + log_factorial(j3mm3));

  const int t1 = (two_j2 - two_j3 - two_m1) / 2;  // j2 - j3 - m1
  const int t2 = (two_j1 - two_j3 + two_m2) / 2;  // j1 - j3 + m2
  const int kmin = std::max({0, t1, t2});
  const int kmax = std::min({a, j1mm1, j2pm2});
  double sum = 0.0;
  for (int k = kmin; k <= kmax; ++k) {
    const double log_term = log_factorial(k) + log_factorial(a - k) + log_factorial(j1mm1 - k) +
                            log_factorial(j2pm2 - k) + log_factorial(k - t1) + log_factorial(k - t2);
    const double term = std::exp(log_delta + log_prefactor - log_term);
    sum += (k % 2 == 0) ? term : -term;
  }
  const int phase_exp = (two_j1 - two_j2 - two_m3) / 2;
  return (phase_exp % 2 == 0) ? sum : -sum;
}

double clebsch_gordan(int two_j1, int two_m1, int two_j2, int two_m2, int two_J, int two_M) {
  if (two_m1 + two_m2 != two_M) return 0.0;
  const double w = wigner_3j(two_j1, two_j2, two_J, two_m1, two_m2, -two_M);
  const int phase_exp = (two_j1 - two_j2 + two_M) / 2;
  const double sign = (std::abs(phase_exp) % 2 == 0) ? 1.0 : -1.0;
  return sign * std::sqrt(two_J + 1.0) * w;
}

}  // namespace ca43::angular
