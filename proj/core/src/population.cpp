#include "popsel/population.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "popsel/errors.hpp"

namespace popsel {

namespace {
constexpr double kLogSqrt2Pi = 0.91893853320467274178;

void check_intrinsic(const IntrinsicModel& intr) {
  if (!(intr.sigma_lambda > 0.0)) {
    throw std::domain_error("IntrinsicModel: sigma_lambda must be > 0");
  }
}

void check_selection(const GaussianSelection& sel) {
  if (!(sel.sigma_d > 0.0)) {
    throw std::domain_error("GaussianSelection: sigma_d must be > 0");
  }
}
}  // namespace

double log_pdet(const SelectionFunction& sel, double x, SelectionScale scale) {
  if (const auto* g = std::get_if<GaussianSelection>(&sel)) {
    check_selection(*g);
    const double z = (x - g->mu_d) / g->sigma_d;
    const double shape = -0.5 * z * z;
    if (scale == SelectionScale::unit_peak) return shape;
    return shape - std::log(g->sigma_d) - kLogSqrt2Pi;
  }
  const auto& step = std::get<StepSelection>(sel);
  return x >= step.threshold ? 0.0 : log_zero();
}

double pdet(const SelectionFunction& sel, double x, SelectionScale scale) {
  const double lp = log_pdet(sel, x, scale);
  return is_log_zero(lp) ? 0.0 : std::exp(lp);
}

double log_observed_pdf(const ObservedModel& obs, double x) {
  if (const auto* g = std::get_if<GaussianObserved>(&obs)) {
    return gaussian_logpdf(x, g->mu_obs, g->sigma_obs);
  }
  const auto& t = std::get<TruncatedObserved>(obs);
  return truncnorm_logpdf(x, TruncGaussianParams{t.mean, t.sd, t.lower});
}

GaussianObserved theta_of_lambda(const IntrinsicModel& intr,
                                 const GaussianSelection& sel) {
  check_intrinsic(intr);
  check_selection(sel);
  const double vd = sel.sigma_d * sel.sigma_d;
  const double vl = intr.sigma_lambda * intr.sigma_lambda;
  GaussianObserved obs;
  obs.mu_obs = (vd * intr.mu_lambda + vl * sel.mu_d) / (vd + vl);
  obs.sigma_obs = 1.0 / std::sqrt(1.0 / vd + 1.0 / vl);
  return obs;
}

IntrinsicModel lambda_of_theta(const GaussianObserved& obs,
                               const GaussianSelection& sel) {
  check_selection(sel);
  if (!(obs.sigma_obs > 0.0)) {
    throw std::domain_error("GaussianObserved: sigma_obs must be > 0");
  }
  if (obs.sigma_obs >= sel.sigma_d) {
    throw InfeasibleParametersError(
        "lambda_of_theta: sigma_obs >= sigma_d, deconvolved variance "
        "non-positive");
  }
  const double vd = sel.sigma_d * sel.sigma_d;
  const double vo = obs.sigma_obs * obs.sigma_obs;
  IntrinsicModel intr;
  intr.sigma_lambda = 1.0 / std::sqrt(1.0 / vo - 1.0 / vd);
  const double vl = intr.sigma_lambda * intr.sigma_lambda;
  intr.mu_lambda = (obs.mu_obs * (vd + vl) - vl * sel.mu_d) / vd;
  return intr;
}

double alpha_of_lambda(const IntrinsicModel& intr, const SelectionFunction& sel,
                       SelectionScale scale) {
  check_intrinsic(intr);
  if (const auto* g = std::get_if<GaussianSelection>(&sel)) {
    check_selection(*g);
    const double conv_sd = std::sqrt(g->sigma_d * g->sigma_d +
                                     intr.sigma_lambda * intr.sigma_lambda);
    double log_alpha = gaussian_logpdf(intr.mu_lambda, g->mu_d, conv_sd);
    if (scale == SelectionScale::unit_peak) {
      log_alpha += std::log(g->sigma_d) + kLogSqrt2Pi;
    }
    return std::exp(log_alpha);
  }
  const auto& step = std::get<StepSelection>(sel);
  return gaussian_sf((step.threshold - intr.mu_lambda) / intr.sigma_lambda);
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  if (n < 2) throw std::domain_error("linspace: need at least 2 points");
  std::vector<double> out(n);
  const double step = (hi - lo) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) out[i] = lo + step * static_cast<double>(i);
  out.back() = hi;
  return out;
}

double log_trapezoid(const DensityGrid& grid) {
  if (grid.points.size() != grid.log_values.size() || grid.points.size() < 2) {
    throw std::domain_error("log_trapezoid: malformed grid");
  }
  const double m =
      *std::max_element(grid.log_values.begin(), grid.log_values.end());
  if (is_log_zero(m)) return log_zero();
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < grid.points.size(); ++i) {
    const double h = grid.points[i + 1] - grid.points[i];
    acc += 0.5 * h *
           (std::exp(grid.log_values[i] - m) +
            std::exp(grid.log_values[i + 1] - m));
  }
  if (acc <= 0.0) return log_zero();
  return m + std::log(acc);
}

void normalize_grid(DensityGrid& grid) {
  const double log_norm = log_trapezoid(grid);
  if (is_log_zero(log_norm)) {
    throw EmptySupportError("normalize_grid: density vanishes everywhere");
  }
  for (double& lv : grid.log_values) {
    if (!is_log_zero(lv)) lv -= log_norm;
  }
}

double grid_expectation(const DensityGrid& grid,
                        const std::vector<double>& f_values) {
  if (f_values.size() != grid.size()) {
    throw std::domain_error("grid_expectation: length mismatch");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    const double h = grid.points[i + 1] - grid.points[i];
    const double a = is_log_zero(grid.log_values[i])
                         ? 0.0
                         : f_values[i] * std::exp(grid.log_values[i]);
    const double b = is_log_zero(grid.log_values[i + 1])
                         ? 0.0
                         : f_values[i + 1] * std::exp(grid.log_values[i + 1]);
    acc += 0.5 * h * (a + b);
  }
  return acc;
}

namespace {
void check_grid_points(std::span<const double> points) {
  if (points.size() < 2) {
    throw std::domain_error("grid: need at least 2 points");
  }
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    if (!(points[i] < points[i + 1])) {
      throw std::domain_error("grid: points must be strictly increasing");
    }
  }
}
}  // namespace

DensityGrid observed_density_grid(const IntrinsicModel& intr,
                                  const SelectionFunction& sel,
                                  std::span<const double> points) {
  check_intrinsic(intr);
  check_grid_points(points);
  DensityGrid grid;
  grid.points.assign(points.begin(), points.end());
  grid.log_values.resize(points.size());
  bool any_support = false;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double lp = log_pdet(sel, points[i], SelectionScale::unit_peak);
    if (is_log_zero(lp)) {
      grid.log_values[i] = log_zero();
      continue;
    }
    grid.log_values[i] =
        gaussian_logpdf(points[i], intr.mu_lambda, intr.sigma_lambda) + lp;
    any_support = true;
  }
  if (!any_support) {
    throw EmptySupportError(
        "observed_density_grid: grid lies entirely in the vetoed region");
  }
  normalize_grid(grid);
  return grid;
}

IntrinsicGridResult intrinsic_from_observed_grid(const DensityGrid& observed,
                                                 const SelectionFunction& sel,
                                                 double floor_frac) {
  if (!(floor_frac > 0.0)) {
    throw std::domain_error("intrinsic_from_observed_grid: floor must be > 0");
  }
  check_grid_points(observed.points);
  if (observed.log_values.size() != observed.points.size()) {
    throw std::domain_error("intrinsic_from_observed_grid: malformed grid");
  }

  std::vector<double> log_det(observed.size());
  double log_peak = log_zero();
  for (std::size_t i = 0; i < observed.size(); ++i) {
    log_det[i] = log_pdet(sel, observed.points[i], SelectionScale::unit_peak);
    log_peak = std::max(log_peak, log_det[i]);
  }
  if (is_log_zero(log_peak)) {
    throw EmptySupportError(
        "intrinsic_from_observed_grid: p_det vanishes on the whole grid");
  }
  const double log_floor = log_peak + std::log(floor_frac);

  IntrinsicGridResult out;
  out.grid.points = observed.points;
  out.grid.log_values.resize(observed.size());
  bool any_support = false;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    if (log_det[i] < log_floor || is_log_zero(observed.log_values[i])) {
      out.grid.log_values[i] = log_zero();
      ++out.n_unconstrained;
      continue;
    }
    out.grid.log_values[i] = observed.log_values[i] - log_det[i];
    any_support = true;
  }
  if (!any_support) {
    throw EmptySupportError(
        "intrinsic_from_observed_grid: no point above the division floor");
  }
  normalize_grid(out.grid);
  return out;
}

std::vector<double> default_grid(double mean, double sd, double span_sds,
                                 std::size_t n) {
  return linspace(mean - span_sds * sd, mean + span_sds * sd, n);
}

PopulationPreset table_preset(std::string_view name) {
  if (name == "wide") {
    return {"wide", IntrinsicModel{-2.0, 3.0}, GaussianSelection{0.0, 2.0}, 1.0};
  }
  if (name == "narrow") {
    return {"narrow", IntrinsicModel{-2.0, 0.6}, GaussianSelection{0.0, 2.0},
            1.0};
  }
  if (name == "equal") {
    return {"equal", IntrinsicModel{-2.0, 1.0}, GaussianSelection{0.0, 1.0},
            1.0};
  }
  throw std::invalid_argument("unknown population preset: " +
                              std::string(name));
}

}  // namespace popsel
