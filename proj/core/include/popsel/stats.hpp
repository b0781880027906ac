#pragma once

#include <cmath>
#include <limits>
#include <span>

namespace popsel {

// All densities in this library live in log space: products over 10^6
// events underflow linear doubles long before they stop carrying
// information. Zero density is represented by the most negative finite
// double rather than -inf so that sums of a few sentinel terms stay
// ordered instead of producing NaNs; is_log_zero() is the one sanctioned
// way to test for it.
constexpr double log_zero() { return -std::numeric_limits<double>::max(); }

constexpr bool is_log_zero(double log_value) {
  return log_value < -0.25 * std::numeric_limits<double>::max();
}

/// Gaussian N(mean, sd), sd > 0.
struct GaussianParams {
  double mean = 0.0;
  double sd = 1.0;
};

/// Gaussian restricted to [lower, inf), renormalised.
struct TruncGaussianParams {
  double mean = 0.0;
  double sd = 1.0;
  double lower = -std::numeric_limits<double>::infinity();
};

/// ln N(x | mean, sd). Throws std::domain_error for non-finite x or sd <= 0.
double gaussian_logpdf(double x, const GaussianParams& p);

inline double gaussian_logpdf(double x, double mean, double sd) {
  return gaussian_logpdf(x, GaussianParams{mean, sd});
}

/// Standard normal CDF, Phi(x).
double gaussian_cdf(double x);

/// Survival function 1 - Phi(x).
double gaussian_sf(double x);

/// ln(1 - Phi(x)), stable into the deep upper tail where erfc underflows.
double log_gaussian_sf(double x);

/// ln TN(x | mean, sd, lower); log_zero() below the truncation bound.
double truncnorm_logpdf(double x, const TruncGaussianParams& p);

/// log(sum(exp(v))) with the usual max shift; log_zero() for empty input.
double logsumexp(std::span<const double> values);

// Pairwise (cascade) summation. Used for per-event log-likelihood sums so
// the result is independent of chunking and accurate to ~eps*log2(n).
double pairwise_sum(std::span<const double> values);

/// Mean and centered sum of squares in one stable two-pass sweep.
struct MeanSs {
  double mean = 0.0;
  double centered_sumsq = 0.0;
};
MeanSs mean_and_sumsq(std::span<const double> values);

}  // namespace popsel
