#pragma once

#include <vector>

namespace ionloc::specfun {

/// Generalized Laguerre polynomial L_m^n(x) by forward recurrence in degree.
/// Throws NumericalError if the recurrence overflows.
double laguerre(int degree, int superscript, double x);

/// Laguerre polynomial scaled by sqrt(m! / (m+n)!), evaluated by a
/// recurrence that keeps the scaled values O(1). Used for oscillator
/// matrix elements at large m and n, where L_m^n itself overflows.
double laguerre_normalized(int degree, int superscript, double x);

/// Bessel function of the first kind J_n(x), integer order n >= 0, x >= 0.
/// Power series below x = 12, normalized Miller backward recurrence above.
double bessel_j(int order, double x);

struct BesselZeroTable {
  int order = 0;
  std::vector<double> zeros;  // j_{order,1} < j_{order,2} < ...
};

/// First `count` positive zeros of J_order, each refined to 1e-10 or better.
BesselZeroTable bessel_zeros(int order, int count);

}  // namespace ionloc::specfun
