#include "popsel/likelihood.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "popsel/errors.hpp"
#include "popsel/quadrature.hpp"
#include "popsel/stats.hpp"

namespace popsel {

namespace {
constexpr double kLogSqrt2Pi = 0.91893853320467274178;

void check_theta(const GaussianObserved& theta) {
  if (!(theta.sigma_obs > 0.0)) {
    throw std::domain_error("loglike: sigma_obs must be > 0");
  }
}
}  // namespace

DataSummary summarize(const Catalog& cat) {
  if (cat.events.empty()) throw std::domain_error("summarize: empty catalog");
  const std::vector<double> obs = cat.observed_values();
  const MeanSs ms = mean_and_sumsq(obs);
  return DataSummary{obs.size(), ms.mean, ms.centered_sumsq};
}

double loglike_observed_gaussian(const DataSummary& summary, double sigma_0,
                                 const GaussianObserved& theta) {
  check_theta(theta);
  if (summary.n < 1) throw std::domain_error("loglike: empty summary");
  const double var = theta.sigma_obs * theta.sigma_obs + sigma_0 * sigma_0;
  const double n = static_cast<double>(summary.n);
  const double dm = summary.mean_obs - theta.mu_obs;
  return -n * (0.5 * std::log(var) + kLogSqrt2Pi) -
         (summary.sumsq_obs + n * dm * dm) / (2.0 * var);
}

double detail::loglike_observed_gaussian_scan(const Catalog& cat,
                                              const GaussianObserved& theta) {
  check_theta(theta);
  std::vector<double> terms;
  terms.reserve(cat.size());
  for (const Event& e : cat.events) {
    const double sd = std::sqrt(theta.sigma_obs * theta.sigma_obs +
                                e.noise_sd * e.noise_sd);
    terms.push_back(gaussian_logpdf(e.observed_value, theta.mu_obs, sd));
  }
  return pairwise_sum(terms);
}

double loglike_observed_gaussian(const Catalog& cat,
                                 const GaussianObserved& theta) {
  if (cat.events.empty()) throw std::domain_error("loglike: empty catalog");
  if (cat.homoscedastic()) {
    return loglike_observed_gaussian(summarize(cat),
                                     cat.events.front().noise_sd, theta);
  }
  return detail::loglike_observed_gaussian_scan(cat, theta);
}

double truncnorm_marginal_logpdf(double obs, double noise_sd,
                                 const TruncatedObserved& p) {
  if (!(p.sd > 0.0) || !(noise_sd > 0.0)) {
    throw std::domain_error("truncnorm_marginal_logpdf: degenerate sd");
  }
  const double vm = p.sd * p.sd;
  const double vn = noise_sd * noise_sd;
  const double conv_sd = std::sqrt(vm + vn);
  // Product of the model Gaussian and the noise kernel: the leftover
  // Gaussian in x has parameters (mu_c, sd_c).
  const double mu_c = (p.mean * vn + obs * vm) / (vm + vn);
  const double sd_c = std::sqrt(vm * vn / (vm + vn));
  return gaussian_logpdf(obs, p.mean, conv_sd) +
         log_gaussian_sf((p.lower - mu_c) / sd_c) -
         log_gaussian_sf((p.lower - p.mean) / p.sd);
}

double loglike_observed_truncnorm(const Catalog& cat,
                                  const TruncatedObserved& theta) {
  if (cat.events.empty()) throw std::domain_error("loglike: empty catalog");
  std::vector<double> terms;
  terms.reserve(cat.size());
  for (const Event& e : cat.events) {
    terms.push_back(
        truncnorm_marginal_logpdf(e.observed_value, e.noise_sd, theta));
  }
  return pairwise_sum(terms);
}

double loglike_inlikelihood_gaussian(const Catalog& cat,
                                     const IntrinsicModel& intr,
                                     const SelectionFunction& sel,
                                     LikelihoodMode mode) {
  if (cat.events.empty()) throw std::domain_error("loglike: empty catalog");
  const double alpha = alpha_of_lambda(intr, sel, SelectionScale::unit_peak);
  if (!(alpha > 1e-300)) {
    throw ImpracticalSelectionError("loglike_inlikelihood: alpha underflow");
  }
  const double n = static_cast<double>(cat.size());
  const double log_alpha = std::log(alpha);

  std::vector<double> terms;
  terms.reserve(cat.size());
  if (mode == LikelihoodMode::threshold_on_data) {
    // p(det | d_i, theta_i) = 1 cancels p_det inside the integrand: the
    // per-event marginal is the plain noise-convolved intrinsic Gaussian.
    for (const Event& e : cat.events) {
      const double sd = std::sqrt(intr.sigma_lambda * intr.sigma_lambda +
                                  e.noise_sd * e.noise_sd);
      terms.push_back(gaussian_logpdf(e.observed_value, intr.mu_lambda, sd));
    }
    return -n * log_alpha + pairwise_sum(terms);
  }

  // threshold_on_parameters: p_det stays in the integrand. Both selection
  // variants fold p_det * p_int into alpha times a normalised observed
  // density, whose noise convolution is analytic.
  if (const auto* g = std::get_if<GaussianSelection>(&sel)) {
    const GaussianObserved theta = theta_of_lambda(intr, *g);
    for (const Event& e : cat.events) {
      const double sd = std::sqrt(theta.sigma_obs * theta.sigma_obs +
                                  e.noise_sd * e.noise_sd);
      terms.push_back(log_alpha +
                      gaussian_logpdf(e.observed_value, theta.mu_obs, sd));
    }
  } else {
    const auto& step = std::get<StepSelection>(sel);
    const TruncatedObserved theta{intr.mu_lambda, intr.sigma_lambda,
                                  step.threshold};
    for (const Event& e : cat.events) {
      terms.push_back(
          log_alpha +
          truncnorm_marginal_logpdf(e.observed_value, e.noise_sd, theta));
    }
  }
  return -n * log_alpha + pairwise_sum(terms);
}

double loglike_inlikelihood_gaussian(const DataSummary& summary, double sigma_0,
                                     const IntrinsicModel& intr,
                                     const GaussianSelection& sel,
                                     LikelihoodMode mode) {
  const double alpha = alpha_of_lambda(intr, SelectionFunction{sel},
                                       SelectionScale::unit_peak);
  if (!(alpha > 1e-300)) {
    throw ImpracticalSelectionError("loglike_inlikelihood: alpha underflow");
  }
  const double n = static_cast<double>(summary.n);
  const double log_alpha = std::log(alpha);
  if (mode == LikelihoodMode::threshold_on_data) {
    const GaussianObserved plain{intr.mu_lambda, intr.sigma_lambda};
    return -n * log_alpha +
           loglike_observed_gaussian(summary, sigma_0, plain);
  }
  // threshold_on_parameters: the alpha factors cancel exactly,
  // -N ln a + sum_i (ln a + ln N(obs_i | Theta(Lambda))).
  const GaussianObserved theta = theta_of_lambda(intr, sel);
  return loglike_observed_gaussian(summary, sigma_0, theta);
}

namespace {
double check_normalized(const std::function<double(double)>& log_density,
                        double lo, double hi) {
  const double mass = integrate(
      [&](double x) {
        const double lv = log_density(x);
        return is_log_zero(lv) ? 0.0 : std::exp(lv);
      },
      lo, hi, 1e-12);
  if (!(std::abs(mass - 1.0) < 1e-6)) {
    throw std::domain_error(
        "loglike_quadrature_oracle: density is not normalised on [lo, hi]");
  }
  return mass;
}
}  // namespace

double loglike_quadrature_oracle(
    const Catalog& cat, const std::function<double(double)>& log_density,
    double lo, double hi) {
  if (cat.events.empty()) throw std::domain_error("loglike: empty catalog");
  check_normalized(log_density, lo, hi);
  std::vector<double> terms;
  terms.reserve(cat.size());
  for (const Event& e : cat.events) {
    const double marginal = integrate(
        [&](double x) {
          const double lv = log_density(x);
          if (is_log_zero(lv)) return 0.0;
          return std::exp(gaussian_logpdf(e.observed_value, x, e.noise_sd) +
                          lv);
        },
        lo, hi, 1e-12);
    terms.push_back(marginal > 0.0 ? std::log(marginal) : log_zero());
  }
  return pairwise_sum(terms);
}

double loglike_quadrature_oracle(const Catalog& cat, const DensityGrid& grid) {
  if (grid.size() < 2) throw std::domain_error("oracle: malformed grid");
  const auto log_density = [&grid](double x) -> double {
    const auto& pts = grid.points;
    if (x < pts.front() || x > pts.back()) return log_zero();
    const auto it = std::upper_bound(pts.begin(), pts.end(), x);
    const std::size_t hi = std::min<std::size_t>(
        static_cast<std::size_t>(it - pts.begin()), pts.size() - 1);
    const std::size_t lo = hi == 0 ? 0 : hi - 1;
    if (hi == lo) return grid.log_values[lo];
    const double a = grid.log_values[lo];
    const double b = grid.log_values[hi];
    if (is_log_zero(a) || is_log_zero(b)) {
      // Interpolate the density, not the log, next to vetoed points.
      const double da = is_log_zero(a) ? 0.0 : std::exp(a);
      const double db = is_log_zero(b) ? 0.0 : std::exp(b);
      const double t = (x - pts[lo]) / (pts[hi] - pts[lo]);
      const double d = da + t * (db - da);
      return d > 0.0 ? std::log(d) : log_zero();
    }
    const double t = (x - pts[lo]) / (pts[hi] - pts[lo]);
    return a + t * (b - a);
  };
  return loglike_quadrature_oracle(cat, log_density, grid.points.front(),
                                   grid.points.back());
}

}  // namespace popsel
