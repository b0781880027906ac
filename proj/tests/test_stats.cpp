#include <doctest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "popsel/rng.hpp"
#include "popsel/stats.hpp"

using namespace popsel;

TEST_SUITE_BEGIN("stats");

TEST_CASE("gaussian_logpdf spot values") {
  // Standard normal at the origin: -0.5*ln(2*pi).
  CHECK(gaussian_logpdf(0.0, 0.0, 1.0) ==
        doctest::Approx(-0.91893853320467274).epsilon(1e-14));
  // Peak value is -ln(sd*sqrt(2*pi)) for any mean.
  for (double sd : {0.25, 1.0, 3.5}) {
    CHECK(gaussian_logpdf(2.0, 2.0, sd) ==
          doctest::Approx(-std::log(sd * std::sqrt(2.0 * M_PI)))
              .epsilon(1e-14));
  }
  // ln N(-1 | -1, sqrt(1.5)) = ln(1/sqrt(3*pi)).
  CHECK(gaussian_logpdf(-1.0, -1.0, std::sqrt(1.5)) ==
        doctest::Approx(-1.1216710872650098).epsilon(1e-12));
}

TEST_CASE("gaussian_logpdf rejects bad input") {
  CHECK_THROWS_AS(gaussian_logpdf(0.0, 0.0, 0.0), std::domain_error);
  CHECK_THROWS_AS(gaussian_logpdf(0.0, 0.0, -1.0), std::domain_error);
  CHECK_THROWS_AS(gaussian_logpdf(std::nan(""), 0.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(
      gaussian_logpdf(std::numeric_limits<double>::infinity(), 0.0, 1.0),
      std::domain_error);
}

TEST_CASE("gaussian density integrates to 1") {
  RngStream rng(42, 0);
  for (int rep = 0; rep < 20; ++rep) {
    const double mean = rng.uniform(-5.0, 5.0);
    const double sd = rng.uniform(0.1, 4.0);
    const double mass = oracle::integrate(
        [&](double x) { return std::exp(gaussian_logpdf(x, mean, sd)); },
        mean - 10.0 * sd, mean + 10.0 * sd);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("gaussian_cdf spot values and symmetry") {
  CHECK(gaussian_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(gaussian_cdf(1.0 / 3.0) ==
        doctest::Approx(0.63055865981823634).epsilon(1e-13));
  CHECK(gaussian_cdf(1.0 / 3.0) ==
        doctest::Approx(oracle::norm_cdf(1.0 / 3.0)).epsilon(1e-13));
  CHECK(gaussian_cdf(8.0) == doctest::Approx(1.0).epsilon(1e-15));

  RngStream rng(7, 0);
  for (int i = 0; i < 100; ++i) {
    const double x = rng.uniform(-8.0, 8.0);
    CHECK(gaussian_cdf(x) + gaussian_cdf(-x) ==
          doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("gaussian_cdf equals the quadrature of the pdf") {
  RngStream rng(11, 0);
  for (int i = 0; i < 100; ++i) {
    const double x = rng.uniform(-6.0, 6.0);
    const double quad =
        oracle::integrate([](double t) { return oracle::norm_pdf(t); }, -14.0,
                          x, 60000);
    CHECK(std::abs(gaussian_cdf(x) - quad) < 1e-10);
  }
}

TEST_CASE("gaussian_cdf is monotone") {
  double prev = 0.0;
  for (int i = 0; i <= 2000; ++i) {
    const double value = gaussian_cdf(-10.0 + 0.01 * i);
    if (i > 0) CHECK(value >= prev);
    prev = value;
  }
}

TEST_CASE("log_gaussian_sf matches direct evaluation and stays finite") {
  for (double x : {-30.0, -5.0, -1.0, 0.0, 1.5, 8.0, 20.0, 35.0}) {
    CHECK(log_gaussian_sf(x) ==
          doctest::Approx(std::log(gaussian_sf(x))).epsilon(1e-12));
  }
  // Across the asymptotic switch the two branches agree.
  const double lo = log_gaussian_sf(35.999);
  const double hi = log_gaussian_sf(36.001);
  CHECK(std::abs(lo - hi) < 0.1);
  CHECK(std::isfinite(log_gaussian_sf(100.0)));
  CHECK(log_gaussian_sf(100.0) < -4999.0);
}

TEST_CASE("truncnorm_logpdf vetoed region and no-truncation limit") {
  const TruncGaussianParams p{1.0, 2.0, -0.5};
  CHECK(is_log_zero(truncnorm_logpdf(p.lower - 1.0, p)));
  CHECK_FALSE(is_log_zero(truncnorm_logpdf(p.lower + 1e-9, p)));

  const TruncGaussianParams open{1.0, 2.0,
                                 -std::numeric_limits<double>::infinity()};
  for (double x : {-3.0, 0.0, 4.5}) {
    CHECK(truncnorm_logpdf(x, open) ==
          doctest::Approx(gaussian_logpdf(x, 1.0, 2.0)).epsilon(1e-15));
  }
}

TEST_CASE("truncnorm_logpdf spot value: half Gaussian") {
  // Truncating N(0,1) at its mean doubles the density: ln(2*phi(0)).
  CHECK(truncnorm_logpdf(0.0, TruncGaussianParams{0.0, 1.0, 0.0}) ==
        doctest::Approx(-0.22579135264472738).epsilon(1e-13));
  CHECK_THROWS_AS(truncnorm_logpdf(0.0, TruncGaussianParams{0.0, -1.0, 0.0}),
                  std::domain_error);
}

TEST_CASE("truncnorm density integrates to 1") {
  RngStream rng(13, 0);
  for (int rep = 0; rep < 20; ++rep) {
    TruncGaussianParams p;
    p.mean = rng.uniform(-3.0, 3.0);
    p.sd = rng.uniform(0.2, 3.0);
    p.lower = p.mean + rng.uniform(-3.0, 2.0) * p.sd;
    const double mass = oracle::integrate(
        [&](double x) {
          const double lv = truncnorm_logpdf(x, p);
          return is_log_zero(lv) ? 0.0 : std::exp(lv);
        },
        p.lower, p.mean + 12.0 * p.sd, 80000);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-8));
  }
}

TEST_CASE("logsumexp and pairwise_sum basics") {
  const std::vector<double> v{std::log(1.0), std::log(2.0), std::log(3.0)};
  CHECK(logsumexp(v) == doctest::Approx(std::log(6.0)).epsilon(1e-14));
  CHECK(is_log_zero(logsumexp(std::vector<double>{})));
  CHECK(is_log_zero(logsumexp(std::vector<double>{log_zero(), log_zero()})));

  std::vector<double> seq(1001);
  for (std::size_t i = 0; i < seq.size(); ++i) seq[i] = 1.0 / (1.0 + i);
  double naive = 0.0;
  for (double x : seq) naive += x;
  CHECK(pairwise_sum(seq) == doctest::Approx(naive).epsilon(1e-13));
}

TEST_CASE("mean_and_sumsq two-pass") {
  const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
  const MeanSs ms = mean_and_sumsq(v);
  CHECK(ms.mean == doctest::Approx(2.5).epsilon(1e-15));
  CHECK(ms.centered_sumsq == doctest::Approx(5.0).epsilon(1e-14));
}

TEST_SUITE_END();
