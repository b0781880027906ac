#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "popsel/population.hpp"
#include "popsel/rng.hpp"
#include "popsel/sampler.hpp"
#include "popsel/simulate.hpp"

namespace popsel {

/// Normal-Inverse-Gamma hyperparameters for the per-component (mean,
/// convolved variance) prior. k0 > 0, a0 > 1, b0 > 0.
struct NIGHyper {
  double m0 = 0.0;
  double k0 = 0.01;
  double a0 = 2.0;
  double b0 = 1.0;
};

/// Data-driven defaults: prior mean at the sample mean, prior scale at the
/// sample variance, weak strength.
NIGHyper empirical_hyper(const Catalog& cat);

// Finite symmetric-Dirichlet truncation of the DP mixture: all k_max
// components carry parameters at all times (empty ones hold fresh prior
// draws), which is what makes the "open a new component" move exact for
// the truncated model. Component variances are parameterised through the
// noise-convolved variance v_j = sigma_j^2 + sigma0^2 (v_j > sigma0^2),
// the variable in which the per-event marginal is conjugate when the
// catalog is homoscedastic.
struct MixtureState {
  std::vector<int> z;           // event -> component label
  std::vector<int> counts;      // per-component event count N_j
  std::vector<double> means;    // mu_j
  std::vector<double> conv_vars;  // v_j = sigma_j^2 + sigma0^2
  std::vector<double> weights;  // simplex over k_max
  double concentration = 1.0;
  NIGHyper hyper;
  double sigma0 = 0.0;
  int k_max = 50;
  /// How many times a component's 1/alpha count inflation hit the 1e-3
  /// floor.
  std::uint64_t n_alpha_capped = 0;

  int n_active() const;
  double component_sd(int j) const;
  void check_consistent(std::size_t n_events) const;
};

MixtureState init_mixture_state(const Catalog& cat, const NIGHyper& hyper,
                                int k_max, double concentration,
                                RngStream& rng);

/// N'_j = N_j / alpha, with alpha floored at 1e-3 so that one starved
/// component cannot blow up the Dirichlet concentration on Monte Carlo
/// noise.
double selection_inflated_count(double count, double alpha);

// One full collapsed-Gibbs pass: (1) reassign every event with DP
// predictive weights, (2) resample every component's (mu_j, v_j) from the
// truncated-NIG conditional -- with selection, by an independence
// Metropolis step whose proposal is that conditional and whose acceptance
// ratio is (alpha_cur / alpha_prop)^N_j, the per-event 1/alpha correction
// -- and (3) resample weights from DD(N + a/K), with N replaced by the
// selection-inflated N'_j = N_j / alpha(mu_j, sigma_j) when a selection
// function is given.
void gibbs_sweep(MixtureState& state, const Catalog& cat,
                 const std::optional<SelectionFunction>& sel, RngStream& rng);

/// Per-draw rendered densities on a fixed grid plus pointwise summary.
struct DensityDraws {
  std::vector<double> points;
  /// One normalised log-density per retained state.
  std::vector<std::vector<double>> log_draws;
  std::vector<double> median;
  std::vector<double> p05;
  std::vector<double> p95;

  void recompute_summary();
};

/// Render every thin-th state of the chain as sum_j w_j N(x | mu_j,
/// sigma_j) on the grid, each draw trapezoid-normalised.
DensityDraws density_draws(const std::vector<MixtureState>& chain,
                           std::span<const double> points, int thin);

/// Divide every draw by p_det and renormalise (the post-processing route
/// to the intrinsic density); summary is recomputed.
DensityDraws postprocess_intrinsic(const DensityDraws& draws,
                                   const SelectionFunction& sel,
                                   double floor_frac = 1e-12);

/// Render each posterior draw's implied density on the grid, one
/// normalised curve per retained draw (e.g. the Gaussian observed model at
/// every Theta sample). log_density(draw_row, x) returns the log density.
DensityDraws render_posterior_densities(
    const PosteriorSamples& samples,
    const std::function<double(std::span<const double>, double)>& log_density,
    std::span<const double> points, int thin = 1);

struct DpgmmConfig {
  int k_max = 50;
  double concentration = 1.0;
  int n_sweeps = 1500;
  int n_burn = 500;
};

/// Init + sweep loop; returns the post-burn states.
std::vector<MixtureState> run_dpgmm_chain(
    const Catalog& cat, const std::optional<SelectionFunction>& sel,
    const DpgmmConfig& config, RngStream& rng);

}  // namespace popsel
