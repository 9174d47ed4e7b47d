#pragma once

// Angular-momentum coupling coefficients. All arguments are doubled
// (two_j = 2j) so half-integer momenta stay exact.

namespace ca43::angular {

double wigner_3j(int two_j1, int two_j2, int two_j3, int two_m1, int two_m2, int two_m3);

/// <j1 m1; j2 m2 | J M> in the Condon-Shortley phase convention.
double clebsch_gordan(int two_j1, int two_m1, int two_j2, int two_m2, int two_J, int two_M);

}  // namespace ca43::angular
