#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "popsel/dpgmm.hpp"
#include "popsel/likelihood.hpp"
#include "popsel/population.hpp"
#include "popsel/sampler.hpp"

namespace popsel {

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// One-sample Kolmogorov-Smirnov test against U(0,1); asymptotic p-value.
/// Needs >= 10 values, all inside [0,1].
KsResult ks_uniformity_test(std::span<const double> values);

/// One-sample KS of a sample against an arbitrary CDF evaluated at the
/// sample points (cdf_at_sorted[i] pairs with the i-th order statistic).
KsResult ks_test_against_cdf(std::span<const double> cdf_at_sorted);

/// Two-sample KS with asymptotic p-value at effective size n1*n2/(n1+n2).
KsResult ks_two_sample(std::span<const double> a, std::span<const double> b);

/// Fraction of draws strictly below the true value, one entry per
/// parameter (order matches `truth`, matched to samples by name).
std::vector<double> percentile_of_truth(
    const PosteriorSamples& samples,
    const std::vector<std::pair<std::string, double>>& truth);

/// Central `level` interval of Beta(k, n-k+1) for each rank k = 1..n: the
/// pointwise credible band for the empirical CDF of n uniform variates.
std::vector<std::pair<double, double>> beta_credible_band(int n_trials,
                                                          double level);

/// Fraction of sorted percentile ranks whose empirical CDF lies inside the
/// `level` Beta band.
double beta_band_coverage(std::span<const double> percentiles, double level);

enum class Pipeline { post_process, in_likelihood };

struct PPConfig {
  int n_trials = 100;
  int n_events = 1000;
  Pipeline pipeline = Pipeline::post_process;
  std::uint64_t seed = 0;
  int n_threads = 0;  // 0 = hardware concurrency
  SamplerConfig sampler;
};

struct PPResult {
  std::vector<std::string> parameter_names;
  /// percentiles[param][trial], only completed trials.
  std::vector<std::vector<double>> percentiles;
  std::size_t n_excluded = 0;
  std::vector<KsResult> ks;
  bool uniformity_pass = false;
};

// The calibration experiment: n_trials independent (catalog, fit,
// percentile-of-truth) repetitions of the chosen inference pipeline on a
// Table-1 model. Trials run in parallel on split RNG streams, so the
// result is identical for any thread count. Trials whose sampler fails to
// converge are excluded and counted.
PPResult run_pp_trials(const PopulationPreset& preset, const PPConfig& config);

/// Jensen-Shannon divergence (nats) between two normalised densities
/// tabulated on a common grid.
double js_divergence(const DensityGrid& p, const DensityGrid& q);

// Standard fits behind the pipelines, exposed for the CLI and tests.
// Prior boxes follow the library defaults: mu in [-20, 20], sigma in
// (0.01, 20].
PriorBox default_theta_prior();
PriorBox default_lambda_prior();

/// Posterior over (mu_obs, sigma_obs) for a Gaussian observed model.
PosteriorSamples fit_observed_gaussian(const Catalog& cat,
                                       const SamplerConfig& config);

/// Posterior over (mean, sd) of a truncated observed model with the
/// truncation bound held at the known threshold.
PosteriorSamples fit_observed_truncated(const Catalog& cat, double lower,
                                        const SamplerConfig& config);

/// Posterior over (mu_lambda, sigma_lambda) with the alpha-corrected
/// in-likelihood.
PosteriorSamples fit_intrinsic(const Catalog& cat, const SelectionFunction& sel,
                               LikelihoodMode mode,
                               const SamplerConfig& config);

}  // namespace popsel
