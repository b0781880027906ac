#include <doctest.h>

#include <cmath>

#include "popsel/errors.hpp"
#include "popsel/sampler.hpp"
#include "popsel/stats.hpp"
#include "popsel/validate.hpp"

using namespace popsel;

namespace {

PosteriorSamples manual_samples(const std::vector<double>& series) {
  PosteriorSamples s;
  s.names = {"x"};
  s.n_params = 1;
  s.draws = series;
  s.log_posterior.assign(series.size(), 0.0);
  s.diag.n_walkers = 1;
  return s;
}

}  // namespace

TEST_SUITE_BEGIN("sampler");

TEST_CASE("flat likelihood recovers the prior box") {
  SamplerConfig config;
  config.n_steps = 1600;
  config.seed = 61;
  const PriorBox box{{{"a", -10.0, 10.0}, {"b", 2.0, 5.0}}};
  const auto samples =
      sample_posterior([](std::span<const double>) { return 0.0; }, box, config);
  REQUIRE(samples.n_draws() == 800u * 32u);
  for (std::size_t p = 0; p < 2; ++p) {
    std::vector<double> u;
    u.reserve(samples.n_draws());
    const double lo = box.params[p].lower, hi = box.params[p].upper;
    for (std::size_t i = 0; i < samples.n_draws(); ++i) {
      u.push_back((samples.at(i, p) - lo) / (hi - lo));
    }
    CHECK(ks_uniformity_test(u).p_value > 0.01);
    CHECK(samples.diag.ess[p] > 10000.0);
  }
}

TEST_CASE("known 1-D Gaussian posterior") {
  SamplerConfig config;
  config.n_steps = 2000;
  config.seed = 62;
  const PriorBox box{{{"x", -10.0, 10.0}}};
  const auto samples = sample_posterior(
      [](std::span<const double> x) { return gaussian_logpdf(x[0], 0.0, 1.0); },
      box, config);
  const double ess = samples.diag.ess[0];
  CHECK(ess >= 4000.0);
  const auto xs = samples.column(0);
  const MeanSs ms = mean_and_sumsq(xs);
  CHECK(std::abs(ms.mean) < 4.0 / std::sqrt(ess));
  const double sd = std::sqrt(ms.centered_sumsq / (xs.size() - 1));
  CHECK(sd == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("correlated 2-D Gaussian: mean and covariance recovered") {
  // Precision matrix of covariance [[1, .6], [.6, 1]].
  const double det = 1.0 - 0.36;
  const double p00 = 1.0 / det, p11 = 1.0 / det, p01 = -0.6 / det;
  SamplerConfig config;
  config.n_steps = 4000;
  config.seed = 63;
  const PriorBox box{{{"x", -10.0, 10.0}, {"y", -10.0, 10.0}}};
  const auto samples = sample_posterior(
      [&](std::span<const double> v) {
        const double x = v[0] - 0.5, y = v[1] + 1.0;
        return -0.5 * (p00 * x * x + 2.0 * p01 * x * y + p11 * y * y);
      },
      box, config);
  CHECK(samples.diag.ess[0] >= 5000.0);
  CHECK(samples.diag.ess[1] >= 5000.0);

  const auto xs = samples.column(0);
  const auto ys = samples.column(1);
  const MeanSs mx = mean_and_sumsq(xs);
  const MeanSs my = mean_and_sumsq(ys);
  CHECK(std::abs(mx.mean - 0.5) < 0.05);
  CHECK(std::abs(my.mean + 1.0) < 0.05);
  CHECK(mx.centered_sumsq / xs.size() == doctest::Approx(1.0).epsilon(0.05));
  CHECK(my.centered_sumsq / ys.size() == doctest::Approx(1.0).epsilon(0.05));
  double cov = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    cov += (xs[i] - mx.mean) * (ys[i] - my.mean);
  }
  cov /= static_cast<double>(xs.size());
  CHECK(cov == doctest::Approx(0.6).epsilon(0.05));
}

TEST_CASE("seed determinism") {
  SamplerConfig config;
  config.n_steps = 400;
  config.seed = 64;
  const PriorBox box{{{"x", -5.0, 5.0}}};
  const LogDensityFn ll = [](std::span<const double> x) {
    return gaussian_logpdf(x[0], 1.0, 0.5);
  };
  const auto a = sample_posterior(ll, box, config);
  const auto b = sample_posterior(ll, box, config);
  CHECK(a.draws == b.draws);
  CHECK(a.log_posterior == b.log_posterior);
}

TEST_CASE("impossible start raises an initialisation error") {
  SamplerConfig config;
  config.n_steps = 100;
  const PriorBox box{{{"x", 0.0, 1.0}}};
  CHECK_THROWS_AS(
      sample_posterior([](std::span<const double>) { return log_zero(); }, box,
                       config),
      SamplerInitError);
}

TEST_CASE("remap applies the closed-form inverse and drops infeasible draws") {
  PosteriorSamples theta;
  theta.names = {"mu_obs", "sigma_obs"};
  theta.n_params = 2;
  theta.draws = {
      -1.0, 1.0 / std::sqrt(2.0),  // maps to (-2, 1) under selection (0, 1)
      -1.0, 1.5,                   // infeasible: sigma_obs = 1.5 sigma_d
  };
  theta.log_posterior = {0.0, 0.0};

  const auto lambda = remap_samples(theta, GaussianSelection{0.0, 1.0});
  REQUIRE(lambda.n_draws() == 1);
  CHECK(lambda.diag.n_infeasible_dropped == 1);
  CHECK(lambda.at(0, 0) == doctest::Approx(-2.0).epsilon(1e-12));
  CHECK(lambda.at(0, 1) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(theta.n_draws() ==
        lambda.n_draws() + lambda.diag.n_infeasible_dropped);

  // Near-flat selection: Lambda ~ Theta.
  const auto wide = remap_samples(theta, GaussianSelection{0.0, 1e8});
  CHECK(wide.at(0, 0) == doctest::Approx(-1.0).epsilon(1e-8));
  CHECK(wide.at(0, 1) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-8));

  PosteriorSamples hopeless = theta;
  hopeless.draws = {-1.0, 3.0, -2.0, 4.0};
  CHECK_THROWS_AS(remap_samples(hopeless, GaussianSelection{0.0, 1.0}),
                  RemapFailureError);
}

TEST_CASE("effective sample size: white noise, AR(1), constant") {
  RngStream rng(65, 0);
  const std::size_t n = 20000;

  std::vector<double> white(n);
  for (double& x : white) x = rng.normal();
  const auto s_white = manual_samples(white);
  const double ess_white = effective_sample_size(s_white)[0];
  CHECK(ess_white > 0.8 * n);
  CHECK(ess_white <= static_cast<double>(n));

  std::vector<double> ar(n);
  ar[0] = rng.normal();
  const double phi = 0.9;
  for (std::size_t i = 1; i < n; ++i) {
    ar[i] = phi * ar[i - 1] + std::sqrt(1.0 - phi * phi) * rng.normal();
  }
  const double ess_ar = effective_sample_size(manual_samples(ar))[0];
  const double expected = n * (1.0 - phi) / (1.0 + phi);
  CHECK(std::abs(ess_ar - expected) < 0.3 * expected);

  const auto s_const = manual_samples(std::vector<double>(500, 3.14));
  CHECK(effective_sample_size(s_const)[0] == 0.0);

  CHECK_THROWS_AS(
      effective_sample_size(manual_samples(std::vector<double>(50, 1.0))),
      std::domain_error);
}

TEST_SUITE_END();
