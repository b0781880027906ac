#pragma once

#include <cstddef>
#include <functional>

#include "popsel/population.hpp"
#include "popsel/simulate.hpp"

namespace popsel {

/// Sufficient statistics of the observed values. Only a valid substitute
/// for the event loop when every event shares the same noise sd.
struct DataSummary {
  std::size_t n = 0;
  double mean_obs = 0.0;
  /// Centered second moment: sum over events of (x - mean_obs)^2.
  double sumsq_obs = 0.0;
};

DataSummary summarize(const Catalog& cat);

// Which detection process the in-likelihood correction assumes.
// threshold_on_data: detection is a deterministic threshold on a statistic
// of the data, so p(det | d_i, theta_i) = 1 and p_det drops out of the
// per-event integrand. threshold_on_parameters: detection acted on the
// true parameters (the generative process of draw_catalog_bernoulli), so
// p_det stays inside the integrand.
enum class LikelihoodMode { threshold_on_parameters, threshold_on_data };

/// Observed-distribution likelihood, Gaussian model: sum over events of
/// ln N(obs_i | mu_obs, sqrt(sigma_obs^2 + sigma_i^2)). Dispatches to the
/// sufficient-statistic path automatically when the catalog is
/// homoscedastic.
double loglike_observed_gaussian(const Catalog& cat,
                                 const GaussianObserved& theta);

/// Sufficient-statistic path (homoscedastic catalogs only).
double loglike_observed_gaussian(const DataSummary& summary, double sigma_0,
                                 const GaussianObserved& theta);

namespace detail {
/// Event-loop path, exposed so the suff-stat identity can be tested.
double loglike_observed_gaussian_scan(const Catalog& cat,
                                      const GaussianObserved& theta);
}  // namespace detail

/// Observed-distribution likelihood, truncated-Gaussian model. Per event
/// the noise kernel is integrated against TN(mean, sd, lower) in closed
/// form; observed values below the veto keep finite likelihood (the noise
/// has full support).
double loglike_observed_truncnorm(const Catalog& cat,
                                  const TruncatedObserved& theta);

/// Single-event marginal ln integral N(obs | x, noise_sd) TN(x | p) dx.
double truncnorm_marginal_logpdf(double obs, double noise_sd,
                                 const TruncatedObserved& p);

// In-likelihood approach: -N ln alpha(Lambda) + sum of per-event marginal
// log-likelihoods. The alpha scale convention cancels mode-internally, so
// the value is reported under SelectionScale::unit_peak.
double loglike_inlikelihood_gaussian(const Catalog& cat,
                                     const IntrinsicModel& intr,
                                     const SelectionFunction& sel,
                                     LikelihoodMode mode);

/// Homoscedastic fast path for the Gaussian selection.
double loglike_inlikelihood_gaussian(const DataSummary& summary, double sigma_0,
                                     const IntrinsicModel& intr,
                                     const GaussianSelection& sel,
                                     LikelihoodMode mode);

// Quadrature oracle: per-event marginals of noise kernel x density by
// adaptive integration on [lo, hi]. The density must be normalised on that
// range (checked to 1e-6); accuracy ~1e-9 relative. Used to pin every
// closed form above.
double loglike_quadrature_oracle(const Catalog& cat,
                                 const std::function<double(double)>& log_density,
                                 double lo, double hi);

/// Grid-backed variant: the density is the linear interpolation of the
/// grid.
double loglike_quadrature_oracle(const Catalog& cat, const DensityGrid& grid);

}  // namespace popsel
