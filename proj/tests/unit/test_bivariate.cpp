#include <doctest.h>

#include <cmath>
#include <numbers>

#include "drivestat/bivariate.hpp"
#include "drivestat/error.hpp"

using namespace drivestat;

namespace {

// Midpoint rule over a box.
template <class F>
double integrate_box(F f, double x0, double x1, double y0, double y1, std::size_t n) {
  const double dx = (x1 - x0) / static_cast<double>(n), dy = (y1 - y0) / static_cast<double>(n);
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      s += f(x0 + (static_cast<double>(i) + 0.5) * dx, y0 + (static_cast<double>(j) + 0.5) * dy);
  return s * dx * dy;
}

}  // namespace

TEST_CASE("bndm density matches the reference and carries mass one half") {
  const BndmParams p{1.0, 2.0};
  CHECK(bndm_pdf(1.0, 1.0, p) == doctest::Approx(0.022799327319919294).epsilon(1e-14));
  CHECK(bndm_peak(p) == doctest::Approx(1.0 / (4.0 * std::numbers::pi)));
  const double mass = integrate_box([&](double x, double y) { return bndm_pdf(x, y, p); }, -8, 8, -16, 16, 800);
  CHECK(mass == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("bndm contour is the expected ellipse") {
  const BndmParams p{1.0, 2.0};
  const double level = bndm_peak(p) / 2.0;
  CHECK(bndm_eta(level, p) == doctest::Approx(std::log(2.0)));
  const Polyline e = bndm_contour(level, p);
  CHECK(e.closed);
  double xmax = 0.0, ymax = 0.0;
  for (const auto& q : e.points) {
    xmax = std::max(xmax, q[0]);
    ymax = std::max(ymax, q[1]);
    REQUIRE(bndm_pdf(q[0], q[1], p) == doctest::Approx(level).epsilon(1e-12));
  }
  CHECK(xmax == doctest::Approx(0.8325546111576978).epsilon(1e-6));
  CHECK(ymax == doctest::Approx(1.6651092223153956).epsilon(1e-6));
  CHECK(bndm_contour(bndm_peak(p), p).points.size() == 1);
  CHECK_THROWS_AS(bndm_contour(2.0 * bndm_peak(p), p), DomainError);
}

TEST_CASE("bpdm density integrates to one") {
  for (const auto& p : {BpdmParams::reference(), BpdmParams::fitted_sections()}) {
    // Substitution x = t/(1-t) maps each half-axis onto [0, 1).
    auto half = [](const GpdParams& g) {
      double s = 0.0;
      const std::size_t n = 200000;
      for (std::size_t i = 0; i < n; ++i) {
        const double t = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
        const double x = t / (1.0 - t);
        if (g.in_support(x)) s += gpd_pdf(x, g) / ((1.0 - t) * (1.0 - t));
      }
      return s / static_cast<double>(n);
    };
    double mass = 0.0;
    for (int q = 0; q < 4; ++q) {
      const auto quad = static_cast<Quadrant>(q);
      mass += p.weights[static_cast<std::size_t>(q)] * half(p.x_params(quad)) * half(p.y_params(quad));
    }
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-4));
  }
}

TEST_CASE("quadrant assignment puts zero on the forward and right side") {
  CHECK(quadrant_of(0.0, 0.0) == Quadrant::forward_right);
  CHECK(quadrant_of(-1.0, 0.0) == Quadrant::brake_right);
  CHECK(quadrant_of(-1.0, -1.0) == Quadrant::brake_left);
  CHECK(quadrant_of(1.0, -1.0) == Quadrant::forward_left);
  const auto p = BpdmParams::reference();
  CHECK(bpdm_pdf(0.0, 0.0, p) == doctest::Approx(0.25 / (p.forward.sigma * p.right.sigma)));
}

TEST_CASE("analytic quadrant contour lies on the level set") {
  const auto p = BpdmParams::reference();
  const double level = 1e-3 * gpd_pdf(0.0, p.forward) * gpd_pdf(0.0, p.right);
  const Polyline c = bpdm_contour_analytic(level, p.forward, p.right);
  CHECK(contour_residual(c, level, p.forward, p.right) < 1e-9);
  CHECK(c.points.front()[0] == 0.0);
  CHECK(c.points.back()[1] == doctest::Approx(0.0).scale(1.0));
  const Polyline printed = bpdm_contour_analytic(level, p.forward, p.right, 512, OmegaSign::printed);
  CHECK(contour_residual(printed, level, p.forward, p.right) > 0.1);
}

TEST_CASE("exponential-limit shapes use the closed form") {
  const GpdParams ex{0.0, 0.5}, gy{0.3, 0.136};
  const double level = 1e-2 * gpd_pdf(0.0, ex) * gpd_pdf(0.0, gy);
  CHECK(contour_residual(bpdm_contour_analytic(level, ex, gy), level, ex, gy) < 1e-9);
  CHECK(contour_residual(bpdm_contour_analytic(level, gy, ex), level, gy, ex) < 1e-9);
}

TEST_CASE("analytic and numeric contours agree") {
  const auto p = BpdmParams::reference();
  const double peak = gpd_pdf(0.0, p.forward) * gpd_pdf(0.0, p.right);
  CHECK(check_quadrant_contour(1e-3 * peak, p.forward, p.right).relative_deviation() <= 0.01);
  CHECK(check_bpdm_contour(1e-2 * bpdm_peak(p), p).relative_deviation() <= 0.01);
  CHECK(check_bndm_contour(0.3 * bndm_peak({1.0, 2.0}), {1.0, 2.0}).relative_deviation() <= 0.01);
}

TEST_CASE("shapes at or below -1 are rejected for contours") {
  const GpdParams bad{-1.0, 1.0}, gy{0.3, 0.136};
  CHECK_THROWS_AS(bpdm_contour_analytic(0.1, bad, gy), ParameterError);
}

TEST_CASE("quadrant counts follow the weights") {
  const std::size_t n = 100000;
  const auto s = bpdm_sample(n, BpdmParams::reference(), 3);
  std::array<std::size_t, 4> counts{};
  for (std::size_t i = 0; i < n; ++i) ++counts[static_cast<std::size_t>(quadrant_of(s.at(i, 0), s.at(i, 1)))];
  const double sd = std::sqrt(static_cast<double>(n) * 0.25 * 0.75);
  for (const auto c : counts) CHECK(std::fabs(static_cast<double>(c) - 0.25 * static_cast<double>(n)) <= 3.0 * sd);
}

TEST_CASE("zero-weight quadrants are never drawn") {
  auto p = BpdmParams::reference();
  p.weights = {0.5, 0.5, 0.0, 0.0};
  const auto s = bpdm_sample(20000, p, 5);
  for (std::size_t i = 0; i < s.size(); ++i) REQUIRE(s.at(i, 0) < 0.0);
}

TEST_CASE("parameter validation") {
  auto p = BpdmParams::reference();
  p.weights = {0.5, 0.5, 0.5, 0.5};
  CHECK_THROWS_AS(validate(p), ParameterError);
  CHECK_THROWS_AS(validate(BndmParams{0.0, 1.0}), ParameterError);
}
