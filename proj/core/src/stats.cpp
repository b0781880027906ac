#include "popsel/stats.hpp"

#include <algorithm>
#include <stdexcept>

namespace popsel {

namespace {
constexpr double kLogSqrt2Pi = 0.91893853320467274178;  // ln sqrt(2*pi)
constexpr double kInvSqrt2 = 0.70710678118654752440;
}  // namespace

double gaussian_logpdf(double x, const GaussianParams& p) {
  if (!(p.sd > 0.0) || !std::isfinite(p.sd)) {
    throw std::domain_error("gaussian_logpdf: sd must be finite and > 0");
  }
  if (!std::isfinite(x) || !std::isfinite(p.mean)) {
    throw std::domain_error("gaussian_logpdf: non-finite argument");
  }
  const double z = (x - p.mean) / p.sd;
  return -0.5 * z * z - std::log(p.sd) - kLogSqrt2Pi;
}

double gaussian_cdf(double x) {
  // 0.5*erfc(-x/sqrt(2)): glibc's erfc is good to <1 ulp in the body and
  // keeps ~1e-12 relative accuracy far into the tail, which is what the
  // step-selection alpha and truncated normalisations sit on.
  return 0.5 * std::erfc(-x * kInvSqrt2);
}

double gaussian_sf(double x) { return 0.5 * std::erfc(x * kInvSqrt2); }

double log_gaussian_sf(double x) {
  if (x < 36.0) {
    // erfc(36/sqrt 2) ~ 4e-284, still representable.
    return std::log(0.5 * std::erfc(x * kInvSqrt2));
  }
  // Asymptotic tail: sf(x) = phi(x)/x * (1 - 1/x^2 + 3/x^4 - 15/x^6 + ...).
  const double x2 = x * x;
  const double series = 1.0 - 1.0 / x2 + 3.0 / (x2 * x2) - 15.0 / (x2 * x2 * x2);
  return -0.5 * x2 - kLogSqrt2Pi - std::log(x) + std::log(series);
}

double truncnorm_logpdf(double x, const TruncGaussianParams& p) {
  if (!(p.sd > 0.0) || !std::isfinite(p.sd)) {
    throw std::domain_error("truncnorm_logpdf: sd must be finite and > 0");
  }
  if (x < p.lower) return log_zero();
  const double base = gaussian_logpdf(x, GaussianParams{p.mean, p.sd});
  if (p.lower == -std::numeric_limits<double>::infinity()) return base;
  return base - log_gaussian_sf((p.lower - p.mean) / p.sd);
}

double logsumexp(std::span<const double> values) {
  if (values.empty()) return log_zero();
  const double m = *std::max_element(values.begin(), values.end());
  if (is_log_zero(m)) return log_zero();
  double acc = 0.0;
  for (double v : values) acc += std::exp(v - m);
  return m + std::log(acc);
}

namespace {
double pairwise_sum_impl(const double* data, std::size_t n) {
  if (n <= 8) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += data[i];
    return acc;
  }
  const std::size_t half = n / 2;
  return pairwise_sum_impl(data, half) + pairwise_sum_impl(data + half, n - half);
}
}  // namespace

double pairwise_sum(std::span<const double> values) {
  return pairwise_sum_impl(values.data(), values.size());
}

MeanSs mean_and_sumsq(std::span<const double> values) {
  MeanSs out;
  if (values.empty()) return out;
  out.mean = pairwise_sum(values) / static_cast<double>(values.size());
  double acc = 0.0;
  for (double v : values) {
    const double d = v - out.mean;
    acc += d * d;
  }
  out.centered_sumsq = acc;
  return out;
}

}  // namespace popsel
