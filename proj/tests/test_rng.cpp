#include <doctest.h>

#include <cmath>
#include <vector>

#include "popsel/rng.hpp"
#include "popsel/stats.hpp"

using namespace popsel;

TEST_SUITE_BEGIN("rng");

TEST_CASE("equal (seed, stream) pairs replay bit-for-bit") {
  RngStream a(123456789, 7);
  RngStream b(123456789, 7);
  for (int i = 0; i < 10000; ++i) {
    CHECK(a.uniform() == b.uniform());
  }
}

TEST_CASE("different streams decorrelate") {
  RngStream a(1, 0);
  RngStream b(1, 1);
  int equal = 0;
  for (int i = 0; i < 1000; ++i) {
    if (a.next_u64() == b.next_u64()) ++equal;
  }
  CHECK(equal == 0);
}

TEST_CASE("split derives deterministic independent streams") {
  const RngStream base(99, 3);
  RngStream s1 = base.split(5);
  RngStream s2 = base.split(5);
  RngStream s3 = base.split(6);
  CHECK(s1.uniform() == s2.uniform());
  CHECK(s1.next_u64() != s3.next_u64());
}

TEST_CASE("uniform moments") {
  RngStream rng(2024, 0);
  const int n = 200000;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    sum += u;
    sumsq += u * u;
  }
  const double mean = sum / n;
  const double var = sumsq / n - mean * mean;
  CHECK(mean == doctest::Approx(0.5).epsilon(0.01));
  CHECK(var == doctest::Approx(1.0 / 12.0).epsilon(0.02));
}

TEST_CASE("normal moments") {
  RngStream rng(5, 0);
  const int n = 200000;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal();
    sum += x;
    sumsq += x * x;
  }
  const double mean = sum / n;
  CHECK(std::abs(mean) < 4.0 / std::sqrt(static_cast<double>(n)));
  CHECK(sumsq / n - mean * mean == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("gamma moments") {
  RngStream rng(6, 0);
  for (double shape : {0.5, 1.0, 2.7}) {
    const int n = 100000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += rng.gamma(shape);
    // mean = shape, var = shape: 4 standard errors of headroom.
    CHECK(std::abs(sum / n - shape) <
          4.0 * std::sqrt(shape / static_cast<double>(n)));
  }
  CHECK_THROWS_AS(rng.gamma(0.0), std::domain_error);
}

TEST_CASE("dirichlet degenerate and error cases") {
  RngStream rng(8, 0);
  const std::vector<double> one{4.2};
  CHECK(dirichlet_sample(one, rng) == std::vector<double>{1.0});
  CHECK_THROWS_AS(dirichlet_sample(std::vector<double>{1.0, 0.0}, rng),
                  std::domain_error);
  CHECK_THROWS_AS(dirichlet_sample(std::vector<double>{}, rng),
                  std::domain_error);
}

TEST_CASE("dirichlet weights sit on the simplex and match the mean") {
  RngStream rng(9, 0);
  // Concentrations N + a/K with N = {50, 50}, a = 1, K = 2.
  const std::vector<double> conc{50.5, 50.5};
  const int n = 100000;
  double sum0 = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto w = dirichlet_sample(conc, rng);
    CHECK(std::abs(w[0] + w[1] - 1.0) < 1e-12);
    CHECK(w[0] >= 0.0);
    CHECK(w[1] >= 0.0);
    sum0 += w[0];
  }
  // sd of one weight is sqrt(a1*a2/(S^2(S+1))) ~ 0.0495.
  const double se = 0.0495 / std::sqrt(static_cast<double>(n));
  CHECK(std::abs(sum0 / n - 0.5) < 3.0 * se);
}

TEST_SUITE_END();
