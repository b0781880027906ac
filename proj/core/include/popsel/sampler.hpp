#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "popsel/population.hpp"
#include "popsel/rng.hpp"

namespace popsel {

/// Uniform prior over an axis-aligned box.
struct PriorBox {
  struct Param {
    std::string name;
    double lower;
    double upper;
  };
  std::vector<Param> params;

  std::size_t dim() const { return params.size(); }
  bool contains(std::span<const double> x) const;
  void validate() const;
};

struct SamplerConfig {
  int n_walkers = 32;
  /// Total steps; the first n_burn are discarded.
  int n_steps = 2000;
  /// Negative means "half of n_steps".
  int n_burn = -1;
  double stretch_scale = 2.0;
  /// Convergence is declared when every parameter clears this ESS.
  double ess_floor = 1000.0;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
};

struct PosteriorSamples {
  std::vector<std::string> names;
  std::size_t n_params = 0;
  /// Row-major (n_draws x n_params), post-burn, step-major within walkers.
  std::vector<double> draws;
  std::vector<double> log_posterior;

  struct Diagnostics {
    double acceptance_rate = 0.0;
    std::vector<double> ess;
    bool converged = false;
    std::size_t n_infeasible_dropped = 0;
    int n_walkers = 1;
  };
  Diagnostics diag;

  std::size_t n_draws() const {
    return n_params == 0 ? 0 : draws.size() / n_params;
  }
  double at(std::size_t draw, std::size_t param) const {
    return draws[draw * n_params + param];
  }
  std::span<const double> row(std::size_t draw) const {
    return {draws.data() + draw * n_params, n_params};
  }
  std::vector<double> column(std::size_t param) const;
  std::size_t param_index(std::string_view name) const;
};

using LogDensityFn = std::function<double(std::span<const double>)>;

// Goodman-Weare affine-invariant ensemble sampler with stretch moves.
// Tuning-free in the <= 4 dimensional boxes this library needs, and
// deterministic: identical (config, seed, stream) reproduce identical
// output bit-for-bit. Walkers update in two half-ensemble batches.
// Throws SamplerInitError if no walker can be initialised at finite
// log-posterior.
PosteriorSamples sample_posterior(const LogDensityFn& loglike,
                                  const PriorBox& prior,
                                  const SamplerConfig& config);

// Per-draw application of lambda_of_theta to (mu_obs, sigma_obs) samples.
// Draws with sigma_obs >= sigma_d lie outside the image of Lambda-space:
// they are dropped and counted, never clamped, because their frequency is
// itself a diagnostic. Throws RemapFailureError if nothing survives.
PosteriorSamples remap_samples(const PosteriorSamples& samples,
                               const GaussianSelection& sel);

// Autocorrelation-based effective sample size per parameter, Geyer
// initial-sequence truncation, averaged over walkers. A constant chain
// reports the 0 sentinel.
std::vector<double> effective_sample_size(const PosteriorSamples& samples);

}  // namespace popsel
