#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "drivestat/distributions.hpp"
#include "drivestat/error.hpp"

using namespace drivestat;

TEST_CASE("gpd pdf matches the 50-digit reference") {
  CHECK(gpd_pdf(1.0, {0.0894, 0.4544}) == doctest::Approx(0.2466423931925795).epsilon(1e-14));
  CHECK(gpd_logpdf(1.0, {0.0894, 0.4544}) == doctest::Approx(std::log(0.2466423931925795)).epsilon(1e-14));
}

TEST_CASE("gpd closed-form landmarks") {
  CHECK(gpd_pdf(0.0, {0.3, 0.136}) == doctest::Approx(1.0 / 0.136));
  CHECK(gpd_pdf(1.0, {0.0, 1.0}) == doctest::Approx(std::exp(-1.0)));
  CHECK(gpd_cdf(0.0, {0.3, 0.136}) == 0.0);
  CHECK(gpd_quantile(0.0, {0.3, 0.136}) == 0.0);
  CHECK(gpd_quantile(1.0 - std::exp(-1.0), {0.0, 1.0}) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("a single draw is the quantile of the first uniform") {
  Rng rng(42);
  const double u = rng.uniform();
  CHECK(gpd_sample(1, {0.3, 0.136}, 42).front() == gpd_quantile(u, {0.3, 0.136}));
}

TEST_CASE("gpd cdf matches adaptive quadrature of the pdf") {
  CHECK(gpd_cdf(0.2, {0.2978, 0.1370}) == doctest::Approx(0.7024516813020012).epsilon(1e-9));
}

TEST_CASE("gpd quantile matches bisection on the cdf") {
  CHECK(gpd_quantile(0.99, {0.3, 0.136}) == doctest::Approx(1.3514191731758542).epsilon(1e-13));
}

TEST_CASE("gpd quantile inverts the cdf across shapes") {
  for (const double k : {-0.4, -0.043, -1e-9, 0.0, 1e-9, 0.09, 0.3, 0.8})
    for (const double p : {1e-6, 0.1, 0.5, 0.9, 0.999}) {
      const GpdParams g{k, 0.47};
      CHECK(gpd_cdf(gpd_quantile(p, g), g) == doctest::Approx(p).epsilon(1e-12));
    }
}

TEST_CASE("gpd shape near zero is continuous with the exponential limit") {
  const double x = 0.7;
  const double limit = std::exp(-x / 0.5) / 0.5;
  CHECK(gpd_pdf(x, {0.0, 0.5}) == doctest::Approx(limit).epsilon(1e-15));
  CHECK(gpd_pdf(x, {1e-7, 0.5}) == doctest::Approx(limit).epsilon(1e-6));
  CHECK(gpd_pdf(x, {-1e-7, 0.5}) == doctest::Approx(limit).epsilon(1e-6));
}

TEST_CASE("negative shape bounds the support") {
  const GpdParams g{-0.25, 1.0};
  CHECK(g.upper_bound() == doctest::Approx(4.0));
  CHECK(gpd_cdf(4.0, g) == 1.0);
  CHECK_THROWS_AS(gpd_pdf(4.5, g), DomainError);
  CHECK_THROWS_AS(gpd_cdf(4.5, g), DomainError);
  for (const double x : gpd_sample(50000, {-0.0429, 0.5063}, 8)) REQUIRE(x <= 0.5063 / 0.0429);
  CHECK(std::isinf(GpdParams{0.3, 1.0}.upper_bound()));
}

TEST_CASE("invalid gpd arguments are rejected") {
  CHECK_THROWS_AS(validate(GpdParams{0.3, 0.0}), ParameterError);
  CHECK_THROWS_AS(validate(GpdParams{0.3, -1.0}), ParameterError);
  CHECK_THROWS_AS(gpd_quantile(1.0, {0.3, 0.1}), DomainError);
  CHECK_THROWS_AS(gpd_quantile(-0.1, {0.3, 0.1}), DomainError);
  CHECK_THROWS_AS(gpd_pdf(-0.1, {0.3, 0.1}), DomainError);
}

TEST_CASE("normal and exponential densities") {
  CHECK(normal_pdf(1.0, {0.0, 2.0}) == doctest::Approx(0.17603266338214973).epsilon(1e-14));
  CHECK(exp_pdf(1.0, {2.0}) == doctest::Approx(0.5 * std::exp(-0.5)).epsilon(1e-15));
  CHECK(exp_pdf(0.0, {2.0}) == 0.5);
  CHECK(normal_pdf(3.0, {3.0, 1.0}) == doctest::Approx(0.3989422804014327));
  CHECK_THROWS_AS(exp_pdf(-1.0, {2.0}), DomainError);
  CHECK_THROWS_AS(validate(NormalParams{0.0, 0.0}), ParameterError);
  CHECK_THROWS_AS(validate(ExpParams{0.0}), ParameterError);
}

TEST_CASE("gpd sampling is seeded and follows the cdf") {
  const GpdParams g{0.3, 0.136};
  const auto a = gpd_sample(20000, g, 3);
  CHECK(a == gpd_sample(20000, g, 3));
  CHECK(a != gpd_sample(20000, g, 4));
  auto sorted = a;
  std::sort(sorted.begin(), sorted.end());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = gpd_cdf(sorted[i], g);
    d = std::max({d, f - static_cast<double>(i) / 20000.0, static_cast<double>(i + 1) / 20000.0 - f});
  }
  CHECK(d < 1.63 / std::sqrt(20000.0));
}
