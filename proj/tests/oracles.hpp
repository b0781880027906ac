#pragma once

#include <cmath>
#include <stdexcept>

// Test-only numerical oracles. Deliberately independent of the library
// code they check: plain composite Simpson instead of Gauss-Kronrod, a
// power series instead of erfc.
namespace oracle {

/// Composite Simpson on n subintervals (n made even internally).
template <class F>
double integrate(F&& f, double a, double b, int n = 40000) {
  if (n % 2 != 0) ++n;
  const double h = (b - a) / n;
  double acc = f(a) + f(b);
  for (int i = 1; i < n; ++i) {
    acc += f(a + h * i) * (i % 2 == 0 ? 2.0 : 4.0);
  }
  return acc * h / 3.0;
}

/// erf by Taylor series; converges to ~1e-16 for |x| <= 4.
inline double erf_series(double x) {
  if (std::abs(x) > 4.0) {
    throw std::domain_error("erf_series: |x| too large for the series");
  }
  const double x2 = x * x;
  double term = x;
  double sum = x;
  for (int n = 1; n < 200; ++n) {
    term *= -x2 / n;
    const double add = term / (2 * n + 1);
    sum += add;
    if (std::abs(add) < 1e-18 * std::abs(sum)) break;
  }
  return sum * 2.0 / std::sqrt(M_PI);
}

/// Standard normal CDF through the series for the body, Simpson for tails.
inline double norm_cdf(double x) {
  if (std::abs(x) <= 4.0) {
    return 0.5 * (1.0 + erf_series(x / std::sqrt(2.0)));
  }
  const auto pdf = [](double t) {
    return std::exp(-0.5 * t * t) / std::sqrt(2.0 * M_PI);
  };
  if (x > 4.0) return 1.0 - integrate(pdf, x, x + 40.0);
  return integrate(pdf, x - 40.0, x);
}

inline double norm_pdf(double x, double mean = 0.0, double sd = 1.0) {
  const double z = (x - mean) / sd;
  return std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * M_PI));
}

}  // namespace oracle
