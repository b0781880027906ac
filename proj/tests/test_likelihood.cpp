#include <doctest.h>

#include <cmath>

#include "popsel/errors.hpp"
#include "popsel/likelihood.hpp"
#include "popsel/rng.hpp"
#include "popsel/simulate.hpp"

using namespace popsel;

namespace {

Catalog single_event_catalog(double observed, double noise_sd) {
  Catalog cat;
  cat.events.push_back(Event{observed, observed, noise_sd});
  cat.n_drawn = 1;
  return cat;
}

Catalog random_catalog(std::size_t n, double sigma_0, RngStream& rng) {
  Catalog cat;
  cat.events.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double truth = rng.normal(-1.0, 1.2);
    cat.events.push_back(Event{truth, truth + rng.normal(0.0, sigma_0), sigma_0});
  }
  cat.n_drawn = n;
  return cat;
}

}  // namespace

TEST_SUITE_BEGIN("likelihood");

TEST_CASE("observed Gaussian: single event closed form") {
  const auto cat = single_event_catalog(-1.0, 1.0);
  const GaussianObserved theta{-1.0, 1.0 / std::sqrt(2.0)};
  CHECK(loglike_observed_gaussian(cat, theta) ==
        doctest::Approx(-1.1216710872650098).epsilon(1e-12));
}

TEST_CASE("observed Gaussian: point-mass population limit") {
  const auto cat = single_event_catalog(0.7, 1.3);
  const GaussianObserved theta{0.2, 1e-9};
  CHECK(loglike_observed_gaussian(cat, theta) ==
        doctest::Approx(gaussian_logpdf(0.7, 0.2, 1.3)).epsilon(1e-10));
}

TEST_CASE("sufficient statistics equal the event loop") {
  RngStream rng(51, 0);
  auto cat = random_catalog(1000, 0.8, rng);
  const DataSummary summary = summarize(cat);
  for (int rep = 0; rep < 50; ++rep) {
    const GaussianObserved theta{rng.uniform(-4.0, 2.0), rng.uniform(0.1, 3.0)};
    const double fast = loglike_observed_gaussian(summary, 0.8, theta);
    const double scan = detail::loglike_observed_gaussian_scan(cat, theta);
    CHECK(std::abs(fast - scan) < 1e-10);
  }
}

TEST_CASE("truncated observed model: limits and spot value") {
  const auto cat = single_event_catalog(0.3, 1.0);

  // lower -> -inf reduces to the plain Gaussian likelihood.
  const TruncatedObserved open{0.5, 2.0, -1e10};
  CHECK(loglike_observed_truncnorm(cat, open) ==
        doctest::Approx(loglike_observed_gaussian(
                            cat, GaussianObserved{0.5, 2.0}))
            .epsilon(1e-9));

  // Observed values may scatter below the veto and stay finite.
  const TruncatedObserved model{0.0, 3.0, -1.0};
  const auto below = single_event_catalog(-4.0, 1.0);
  CHECK(std::isfinite(loglike_observed_truncnorm(below, model)));

  // Frozen quadrature value for (mean 0, sd 3, lower -1, obs 0.3, noise 1).
  CHECK(truncnorm_marginal_logpdf(0.3, 1.0, model) ==
        doctest::Approx(-1.70826040429).epsilon(1e-10));
}

TEST_CASE("truncated closed form matches the quadrature oracle") {
  RngStream rng(52, 0);
  for (int rep = 0; rep < 100; ++rep) {
    TruncatedObserved model{rng.uniform(-2.0, 2.0), rng.uniform(0.3, 3.0), 0.0};
    model.lower = model.mean + rng.uniform(-3.0, 1.5) * model.sd;
    const double noise = rng.uniform(0.2, 2.0);
    const double obs = model.mean + rng.uniform(-4.0, 4.0);
    const auto cat = single_event_catalog(obs, noise);

    const double closed = loglike_observed_truncnorm(cat, model);
    const double quad = loglike_quadrature_oracle(
        cat,
        [&](double x) {
          return truncnorm_logpdf(
              x, TruncGaussianParams{model.mean, model.sd, model.lower});
        },
        model.lower, model.mean + 14.0 * model.sd);
    CHECK(std::abs(closed - quad) < 1e-8 * std::max(1.0, std::abs(quad)));
  }
}

TEST_CASE("in-likelihood equals the observed likelihood at Theta(Lambda)") {
  RngStream rng(53, 0);
  auto cat = random_catalog(200, 1.0, rng);
  for (int rep = 0; rep < 100; ++rep) {
    const IntrinsicModel intr{rng.uniform(-4.0, 2.0), rng.uniform(0.3, 3.0)};
    const GaussianSelection sel{rng.uniform(-1.0, 1.0), rng.uniform(0.5, 3.0)};
    const double in_like = loglike_inlikelihood_gaussian(
        cat, intr, SelectionFunction{sel},
        LikelihoodMode::threshold_on_parameters);
    const double observed =
        loglike_observed_gaussian(cat, theta_of_lambda(intr, sel));
    CHECK(std::abs(in_like - observed) < 1e-10 * std::max(1.0, std::abs(observed)));
  }
}

TEST_CASE("in-likelihood with a step selection folds into the truncated form") {
  RngStream rng(54, 0);
  auto cat = random_catalog(100, 1.0, rng);
  const IntrinsicModel intr{0.0, 3.0};
  const StepSelection step{-1.0};
  const double in_like = loglike_inlikelihood_gaussian(
      cat, intr, SelectionFunction{step},
      LikelihoodMode::threshold_on_parameters);
  const double observed = loglike_observed_truncnorm(
      cat, TruncatedObserved{0.0, 3.0, -1.0});
  CHECK(std::abs(in_like - observed) < 1e-10 * std::abs(observed));
}

TEST_CASE("unit selection collapses both modes") {
  RngStream rng(55, 0);
  auto cat = random_catalog(50, 1.0, rng);
  const IntrinsicModel intr{-1.5, 1.1};
  const SelectionFunction unit = StepSelection{-1e300};
  CHECK(alpha_of_lambda(intr, unit) == 1.0);
  const double a = loglike_inlikelihood_gaussian(
      cat, intr, unit, LikelihoodMode::threshold_on_parameters);
  const double b = loglike_inlikelihood_gaussian(
      cat, intr, unit, LikelihoodMode::threshold_on_data);
  CHECK(a == doctest::Approx(b).epsilon(1e-12));
}

TEST_CASE("equal-model single event through the equivalence identity") {
  const auto cat = single_event_catalog(-1.0, 1.0);
  // Theta(equal) = (-1, 1/sqrt 2), so the marginal width is sqrt(1.5).
  const double value = loglike_inlikelihood_gaussian(
      cat, IntrinsicModel{-2.0, 1.0}, SelectionFunction{GaussianSelection{0.0, 1.0}},
      LikelihoodMode::threshold_on_parameters);
  CHECK(value == doctest::Approx(-1.1216710872650098).epsilon(1e-12));
}

TEST_CASE("quadrature oracle self-checks") {
  const auto cat = single_event_catalog(0.4, 0.9);

  const GaussianObserved theta{-0.3, 1.4};
  const double quad = loglike_quadrature_oracle(
      cat, [&](double x) { return gaussian_logpdf(x, theta.mu_obs, theta.sigma_obs); },
      theta.mu_obs - 14.0 * theta.sigma_obs, theta.mu_obs + 14.0 * theta.sigma_obs);
  CHECK(quad == doctest::Approx(loglike_observed_gaussian(cat, theta)).epsilon(1e-8));

  // A near-delta density turns the marginal into the noise kernel.
  const double delta = loglike_quadrature_oracle(
      cat, [](double x) { return gaussian_logpdf(x, 1.0, 1e-6); }, 1.0 - 1e-3,
      1.0 + 1e-3);
  CHECK(delta == doctest::Approx(gaussian_logpdf(0.4, 1.0, 0.9)).epsilon(1e-6));

  // Unnormalised densities are refused.
  CHECK_THROWS_AS(loglike_quadrature_oracle(
                      cat, [](double) { return std::log(0.2); }, 0.0, 1.0),
                  std::domain_error);
}

TEST_CASE("grid-backed oracle agrees with the callable one") {
  RngStream rng(56, 0);
  auto cat = random_catalog(20, 1.0, rng);
  const auto grid = observed_density_grid(IntrinsicModel{-1.0, 1.5},
                                          StepSelection{-1e12},
                                          linspace(-16.0, 14.0, 4001));
  const double from_grid = loglike_quadrature_oracle(cat, grid);
  const double direct = loglike_observed_gaussian(cat, GaussianObserved{-1.0, 1.5});
  CHECK(from_grid == doctest::Approx(direct).epsilon(1e-6));
}

TEST_CASE("translation equivariance of the fit objective") {
  RngStream rng(57, 0);
  auto cat = random_catalog(400, 1.0, rng);
  const double shift = 1.75;
  Catalog shifted = cat;
  for (Event& e : shifted.events) e.observed_value += shift;

  const auto argmax_mu = [](const Catalog& c) {
    double best = -1e308, best_mu = 0.0;
    for (int i = 0; i <= 4000; ++i) {
      const double mu = -6.0 + 0.002 * i;
      const double ll = loglike_observed_gaussian(c, GaussianObserved{mu, 0.9});
      if (ll > best) {
        best = ll;
        best_mu = mu;
      }
    }
    return best_mu;
  };
  // Grid resolution is 0.002 and the shift is a multiple of it, so the
  // argmax moves by exactly the shift.
  CHECK(argmax_mu(shifted) ==
        doctest::Approx(argmax_mu(cat) + shift).epsilon(1e-9));
}

TEST_CASE("summaries reject empty catalogs") {
  Catalog empty;
  CHECK_THROWS_AS(summarize(empty), std::domain_error);
  CHECK_THROWS_AS(
      loglike_observed_gaussian(empty, GaussianObserved{0.0, 1.0}),
      std::domain_error);
}

TEST_SUITE_END();
