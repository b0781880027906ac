#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "popsel/stats.hpp"

namespace popsel {

/// Intrinsic population: delta-phi ~ N(mu_lambda, sigma_lambda).
struct IntrinsicModel {
  double mu_lambda = 0.0;
  double sigma_lambda = 1.0;
};

/// Gaussian-shaped detection probability centred on mu_d.
struct GaussianSelection {
  double mu_d = 0.0;
  double sigma_d = 1.0;
};

/// Hard veto below the threshold, certain detection above it.
struct StepSelection {
  double threshold = 0.0;
};

using SelectionFunction = std::variant<GaussianSelection, StepSelection>;

// The Gaussian selection is a *shape*; as written its peak is
// 1/(sigma_d*sqrt(2 pi)), which is not a probability. Every posterior is
// invariant to this constant, so both readings are exposed: `density`
// keeps the normalised-Gaussian value, `unit_peak` rescales so
// max p_det = 1 and the value is a valid per-event detection probability
// (this is what rejection sampling and the N/alpha count inflation need).
enum class SelectionScale { density, unit_peak };

double log_pdet(const SelectionFunction& sel, double x,
                SelectionScale scale = SelectionScale::unit_peak);
double pdet(const SelectionFunction& sel, double x,
            SelectionScale scale = SelectionScale::unit_peak);

/// Observed distribution when intrinsic and selection are conjugate
/// Gaussians.
struct GaussianObserved {
  double mu_obs = 0.0;
  double sigma_obs = 1.0;
};

/// Observed distribution under a step selection: Gaussian truncated at the
/// veto threshold.
struct TruncatedObserved {
  double mean = 0.0;
  double sd = 1.0;
  double lower = 0.0;
};

using ObservedModel = std::variant<GaussianObserved, TruncatedObserved>;

double log_observed_pdf(const ObservedModel& obs, double x);

// Conjugate map Theta(Lambda): product of the intrinsic Gaussian and the
// Gaussian selection, renormalised. sigma_obs < min(sigma_lambda, sigma_d)
// always (variance shrinks under multiplication).
GaussianObserved theta_of_lambda(const IntrinsicModel& intr,
                                 const GaussianSelection& sel);

// Exact inverse of theta_of_lambda. Throws InfeasibleParametersError when
// sigma_obs >= sigma_d: such a point is outside the image of Lambda-space
// and signals a posterior draw that cannot come from any intrinsic model.
IntrinsicModel lambda_of_theta(const GaussianObserved& obs,
                               const GaussianSelection& sel);

/// alpha(Lambda) = integral of p_det * p_int, the detection probability
/// marginalised over the population.
double alpha_of_lambda(const IntrinsicModel& intr, const SelectionFunction& sel,
                       SelectionScale scale = SelectionScale::unit_peak);

/// Tabulated log density on a strictly increasing grid.
struct DensityGrid {
  std::vector<double> points;
  std::vector<double> log_values;

  std::size_t size() const { return points.size(); }
};

std::vector<double> linspace(double lo, double hi, std::size_t n);

/// ln of the trapezoid integral of exp(log_values), max-shifted for
/// stability.
double log_trapezoid(const DensityGrid& grid);

/// Shift log_values so the trapezoid integral is 1.
void normalize_grid(DensityGrid& grid);

/// Trapezoid quadrature of f(x)*density over the grid.
double grid_expectation(const DensityGrid& grid,
                        const std::vector<double>& f_values);

// p_obs = p_int * p_det on the given points, trapezoid-normalised.
// Throws EmptySupportError if every point is vetoed.
DensityGrid observed_density_grid(const IntrinsicModel& intr,
                                  const SelectionFunction& sel,
                                  std::span<const double> points);

struct IntrinsicGridResult {
  DensityGrid grid;
  // Points where p_det fell below floor_frac * max(p_det): the observed
  // density carries no information about the intrinsic one there. They get
  // zero density in `grid` rather than an extrapolated value.
  std::size_t n_unconstrained = 0;
};

// Post-processing division p_int ~ p_obs / p_det, renormalised.
// floor_frac is relative to the peak of p_det over the grid.
IntrinsicGridResult intrinsic_from_observed_grid(const DensityGrid& observed,
                                                 const SelectionFunction& sel,
                                                 double floor_frac = 1e-12);

/// Default grid: n points spanning mean +/- span_sds standard deviations.
std::vector<double> default_grid(double mean, double sd, double span_sds = 8.0,
                                 std::size_t n = 2001);

/// One column of Table 1: an intrinsic model, its Gaussian selection, and
/// the common measurement noise.
struct PopulationPreset {
  std::string name;
  IntrinsicModel intrinsic;
  GaussianSelection selection;
  double sigma_0 = 1.0;
};

/// Built-in presets "wide", "narrow", "equal". Throws std::invalid_argument
/// for unknown names.
PopulationPreset table_preset(std::string_view name);

}  // namespace popsel
