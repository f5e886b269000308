#include "ionloc/specfun.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "ionloc/errors.hpp"

namespace ionloc::specfun {

namespace {

constexpr double kSeriesCutoff = 12.0;

double bessel_series(int n, double x) {
  const double half = 0.5 * x;
  const double q = half * half;
  double term = std::exp(n * std::log(half) - std::lgamma(n + 1.0));
  double sum = term;
  for (int k = 0; k < 500; ++k) {
    term *= -q / ((k + 1.0) * (k + n + 1.0));
    sum += term;
    if (k > half && std::abs(term) < 1e-18 * std::max(1.0, std::abs(sum))) {
      break;
    }
  }
  return sum;
}

// Backward recurrence from well above max(n, x), normalized with
// J_0 + 2 * sum_k J_{2k} = 1.
double bessel_miller(int n, double x) {
  const int top = std::max(n, static_cast<int>(x));
  int start = 2 * ((top + static_cast<int>(std::sqrt(160.0 * top))) / 2) + 20;
  const double two_over_x = 2.0 / x;
  double next = 0.0;
  double cur = 1e-300;
  double result = 0.0;
  double norm = 0.0;
  for (int k = start; k > 0; --k) {
    const double prev = k * two_over_x * cur - next;
    next = cur;
    cur = prev;  // cur now holds J_{k-1} (unnormalized)
    if (std::abs(cur) > 1e250) {
      cur *= 1e-250;
      next *= 1e-250;
      result *= 1e-250;
      norm *= 1e-250;
    }
    if ((k - 1) % 2 == 0 && k - 1 > 0) norm += 2.0 * cur;
    if (k - 1 == n) result = cur;
  }
  norm += cur;
  return result / norm;
}

}  // namespace

double laguerre(int degree, int superscript, double x) {
  if (degree == 0) return 1.0;
  const double n = superscript;
  double prev = 1.0;
  double cur = n + 1.0 - x;
  for (int k = 1; k < degree; ++k) {
    const double next = ((2.0 * k + 1.0 + n - x) * cur - (k + n) * prev) / (k + 1.0);
    prev = cur;
    cur = next;
  }
  if (!std::isfinite(cur)) {
    throw NumericalError("laguerre(" + std::to_string(degree) + ", " +
                         std::to_string(superscript) + ") overflowed");
  }
  return cur;
}

double laguerre_normalized(int degree, int superscript, double x) {
  const double n = superscript;
  double prev = std::exp(-0.5 * std::lgamma(n + 1.0));
  if (degree == 0) return prev;
  double cur = (n + 1.0 - x) * prev / std::sqrt(n + 1.0);
  for (int k = 1; k < degree; ++k) {
    const double next = ((2.0 * k + 1.0 + n - x) * cur - std::sqrt(k * (k + n)) * prev) /
                        std::sqrt((k + 1.0) * (k + 1.0 + n));
    prev = cur;
    cur = next;
  }
  if (!std::isfinite(cur)) {
    throw NumericalError("normalized laguerre(" + std::to_string(degree) + ", " +
                         std::to_string(superscript) + ") is not finite");
  }
  return cur;
}

double bessel_j(int order, double x) {
  if (order < 0 || !(x >= 0.0)) {
    throw ConfigError("bessel_j requires order >= 0 and x >= 0");
  }
  if (x == 0.0) return order == 0 ? 1.0 : 0.0;
  return x < kSeriesCutoff ? bessel_series(order, x) : bessel_miller(order, x);
}

BesselZeroTable bessel_zeros(int order, int count) {
  if (order < 0 || count < 1) {
    throw ConfigError("bessel_zeros requires order >= 0 and count >= 1");
  }
  BesselZeroTable table{order, {}};
  table.zeros.reserve(count);

  // J_n is positive on (0, j_{n,1}) and j_{n,1} > n. Consecutive zeros are
  // more than 2.9 apart for every order, so a quarter-period step never
  // straddles two of them.
  const double step = std::numbers::pi / 4.0;
  double a = static_cast<double>(order);
  double fa = bessel_j(order, a);
  const double limit = order + (count + 4) * 2.0 * std::numbers::pi;

  while (static_cast<int>(table.zeros.size()) < count) {
    if (a > limit) {
      throw NumericalError("bessel_zeros: bracketing failed for order " +
                           std::to_string(order));
    }
    double b = a + step;
    double fb = bessel_j(order, b);
    if (fb == 0.0) {
      table.zeros.push_back(b);
      a = b + 1e-6;
      fa = bessel_j(order, a);
      continue;
    }
    if ((fa > 0.0) == (fb > 0.0)) {
      a = b;
      fa = fb;
      continue;
    }
    // Illinois-modified secant inside the bracket, bisection when the
    // secant stalls.
    double lo = a, hi = b, flo = fa, fhi = fb;
    int side = 0;
    for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
      double mid = (lo * fhi - hi * flo) / (fhi - flo);
      if (!(mid > lo && mid < hi) || it % 8 == 7) mid = 0.5 * (lo + hi);
      const double fm = bessel_j(order, mid);
      if (fm == 0.0) {
        lo = hi = mid;
        break;
      }
      if ((fm > 0.0) == (fhi > 0.0)) {
        hi = mid;
        fhi = fm;
        if (side == 1) flo *= 0.5;
        side = 1;
      } else {
        lo = mid;
        flo = fm;
        if (side == -1) fhi *= 0.5;
        side = -1;
      }
    }
    const double root = 0.5 * (lo + hi);
    if (std::abs(bessel_j(order, root)) > 1e-10) {
      throw NumericalError("bessel_zeros: refinement did not converge for order " +
                           std::to_string(order));
    }
    table.zeros.push_back(root);
    a = b;
    fa = fb;
  }
  return table;
}

}  // namespace ionloc::specfun
