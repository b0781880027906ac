#include "popsel/simulate.hpp"

#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "popsel/errors.hpp"
#include "popsel/quadrature.hpp"

namespace popsel {

namespace {

using nlohmann::json;

json selection_json(const SelectionFunction& sel) {
  if (const auto* g = std::get_if<GaussianSelection>(&sel)) {
    return {{"variant", "gaussian"}, {"mu_d", g->mu_d}, {"sigma_d", g->sigma_d}};
  }
  const auto& step = std::get<StepSelection>(sel);
  return {{"variant", "step"}, {"threshold", step.threshold}};
}

std::string provenance_blob(const char* generator, const IntrinsicModel& intr,
                            const json& selection, std::size_t n_detections,
                            double sigma_0, bool heteroscedastic,
                            const RngStream& rng, std::uint64_t n_drawn) {
  json j = {
      {"generator", generator},
      {"mu_lambda", intr.mu_lambda},
      {"sigma_lambda", intr.sigma_lambda},
      {"selection", selection},
      {"n_detections", n_detections},
      {"sigma_0", sigma_0},
      {"heteroscedastic", heteroscedastic},
      {"seed", rng.seed()},
      {"stream", rng.stream_id()},
      {"n_drawn", n_drawn},
  };
  return j.dump();
}

void check_common(const IntrinsicModel& intr, std::size_t n_detections,
                  double sigma_0,
                  const std::optional<std::vector<double>>& noise_sds) {
  if (!(intr.sigma_lambda > 0.0)) {
    throw std::domain_error("catalog draw: sigma_lambda must be > 0");
  }
  if (n_detections < 1) {
    throw std::domain_error("catalog draw: n_detections must be >= 1");
  }
  if (noise_sds) {
    if (noise_sds->size() != n_detections) {
      throw std::domain_error(
          "catalog draw: noise_sds length must equal n_detections");
    }
    for (double s : *noise_sds) {
      if (!(s > 0.0)) throw std::domain_error("catalog draw: noise sd <= 0");
    }
  } else if (!(sigma_0 > 0.0)) {
    throw std::domain_error("catalog draw: sigma_0 must be > 0");
  }
}

double event_noise_sd(const std::optional<std::vector<double>>& noise_sds,
                      double sigma_0, std::size_t i) {
  return noise_sds ? (*noise_sds)[i] : sigma_0;
}

}  // namespace

bool Catalog::homoscedastic() const {
  if (events.empty()) return true;
  const double s0 = events.front().noise_sd;
  for (const Event& e : events) {
    if (e.noise_sd != s0) return false;
  }
  return true;
}

std::vector<double> Catalog::observed_values() const {
  std::vector<double> out;
  out.reserve(events.size());
  for (const Event& e : events) out.push_back(e.observed_value);
  return out;
}

std::vector<double> Catalog::true_values() const {
  std::vector<double> out;
  out.reserve(events.size());
  for (const Event& e : events) out.push_back(e.true_value);
  return out;
}

Catalog draw_catalog_bernoulli(
    const IntrinsicModel& intr, const SelectionFunction& sel,
    std::size_t n_detections, double sigma_0, RngStream& rng,
    const std::optional<std::vector<double>>& noise_sds) {
  check_common(intr, n_detections, sigma_0, noise_sds);
  const double alpha = alpha_of_lambda(intr, sel, SelectionScale::unit_peak);
  if (alpha < 1e-10) {
    throw ImpracticalSelectionError(
        "draw_catalog_bernoulli: alpha(Lambda) below 1e-10");
  }

  const RngStream rng_at_start = rng;
  Catalog cat;
  cat.events.reserve(n_detections);
  while (cat.events.size() < n_detections) {
    const double theta = rng.normal(intr.mu_lambda, intr.sigma_lambda);
    ++cat.n_drawn;
    const double lp = log_pdet(sel, theta, SelectionScale::unit_peak);
    if (is_log_zero(lp)) continue;
    // lp == 0 (certain detection) must not consume a uniform, so that the
    // p_det == 1 path is bit-replayable against an unselected draw loop.
    if (lp < 0.0 && std::log(rng.uniform_pos()) >= lp) continue;
    const double sd = event_noise_sd(noise_sds, sigma_0, cat.events.size());
    cat.events.push_back(Event{theta, theta + rng.normal(0.0, sd), sd});
  }
  cat.provenance = provenance_blob("bernoulli", intr, selection_json(sel),
                                   n_detections, sigma_0,
                                   noise_sds.has_value(), rng_at_start,
                                   cat.n_drawn);
  return cat;
}

Catalog draw_catalog_threshold(
    const IntrinsicModel& intr, const ThresholdDetector& det,
    std::size_t n_detections, double sigma_0, RngStream& rng,
    const std::optional<std::vector<double>>& noise_sds) {
  check_common(intr, n_detections, sigma_0, noise_sds);
  if (!(det.stat_noise_sd > 0.0)) {
    throw std::domain_error("draw_catalog_threshold: stat_noise_sd must be > 0");
  }
  const double frac = detection_fraction_threshold(intr, det);
  if (frac < 1e-10) {
    throw ImpracticalSelectionError(
        "draw_catalog_threshold: marginal detection fraction below 1e-10");
  }

  const RngStream rng_at_start = rng;
  Catalog cat;
  cat.events.reserve(n_detections);
  while (cat.events.size() < n_detections) {
    const double theta = rng.normal(intr.mu_lambda, intr.sigma_lambda);
    ++cat.n_drawn;
    const double rho_opt = det.rho_opt_slope * theta + det.rho_opt_offset;
    const double rho_obs = rng.normal(rho_opt, det.stat_noise_sd);
    if (rho_obs < det.threshold) continue;
    const double sd = event_noise_sd(noise_sds, sigma_0, cat.events.size());
    cat.events.push_back(Event{theta, theta + rng.normal(0.0, sd), sd});
  }
  json det_json = {{"variant", "threshold"},
                   {"rho_opt_slope", det.rho_opt_slope},
                   {"rho_opt_offset", det.rho_opt_offset},
                   {"stat_noise_sd", det.stat_noise_sd},
                   {"threshold", det.threshold}};
  cat.provenance =
      provenance_blob("threshold", intr, det_json, n_detections, sigma_0,
                      noise_sds.has_value(), rng_at_start, cat.n_drawn);
  return cat;
}

Catalog draw_catalog_bernoulli_on_observed(const IntrinsicModel& intr,
                                           const SelectionFunction& sel,
                                           std::size_t n_detections,
                                           double sigma_0, RngStream& rng) {
  check_common(intr, n_detections, sigma_0, std::nullopt);
  const double alpha = alpha_of_lambda(intr, sel, SelectionScale::unit_peak);
  if (alpha < 1e-10) {
    throw ImpracticalSelectionError(
        "draw_catalog_bernoulli_on_observed: alpha(Lambda) below 1e-10");
  }

  const RngStream rng_at_start = rng;
  Catalog cat;
  cat.events.reserve(n_detections);
  while (cat.events.size() < n_detections) {
    const double theta = rng.normal(intr.mu_lambda, intr.sigma_lambda);
    ++cat.n_drawn;
    const double measured = theta + rng.normal(0.0, sigma_0);
    const double lp = log_pdet(sel, measured, SelectionScale::unit_peak);
    if (is_log_zero(lp)) continue;
    if (lp < 0.0 && std::log(rng.uniform_pos()) >= lp) continue;
    cat.events.push_back(Event{theta, measured, sigma_0});
  }
  cat.provenance = provenance_blob("bernoulli_on_observed", intr,
                                   selection_json(sel), n_detections, sigma_0,
                                   false, rng_at_start, cat.n_drawn);
  return cat;
}

double empirical_detection_fraction(const Catalog& cat) {
  if (cat.n_drawn == 0) {
    throw std::domain_error("empirical_detection_fraction: n_drawn == 0");
  }
  return static_cast<double>(cat.events.size()) /
         static_cast<double>(cat.n_drawn);
}

double detection_fraction_threshold(const IntrinsicModel& intr,
                                    const ThresholdDetector& det) {
  const auto integrand = [&](double x) {
    const double rho_opt = det.rho_opt_slope * x + det.rho_opt_offset;
    const double p = gaussian_sf((det.threshold - rho_opt) / det.stat_noise_sd);
    return p * std::exp(gaussian_logpdf(x, intr.mu_lambda, intr.sigma_lambda));
  };
  const double lo = intr.mu_lambda - 12.0 * intr.sigma_lambda;
  const double hi = intr.mu_lambda + 12.0 * intr.sigma_lambda;
  return integrate(integrand, lo, hi);
}

}  // namespace popsel
