#include <doctest.h>

#include <cmath>
#include <functional>
#include <sstream>

#include "drivestat/error.hpp"
#include "drivestat/levelset.hpp"

using namespace drivestat;

namespace {

DensityGrid sampled(double lo, double hi, std::size_t n, const std::function<double(double, double)>& f) {
  std::vector<double> axis(n);
  for (std::size_t i = 0; i < n; ++i) axis[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  std::vector<double> values(n * n);
  for (std::size_t iy = 0; iy < n; ++iy)
    for (std::size_t ix = 0; ix < n; ++ix) values[iy * n + ix] = f(axis[ix], axis[iy]);
  return DensityGrid({axis, axis}, values);
}

}  // namespace

TEST_CASE("circle level set of a radial bump") {
  const auto g = sampled(-2.0, 2.0, 201, [](double x, double y) { return std::exp(-(x * x + y * y)); });
  const auto lines = levelset_numeric(g, std::exp(-1.0));
  REQUIRE(lines.size() == 1);
  CHECK(lines[0].closed);
  for (const auto& p : lines[0].points) REQUIRE(std::hypot(p[0], p[1]) == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("two separate bumps give two closed contours") {
  const auto g = sampled(-3.0, 3.0, 121, [](double x, double y) {
    return std::exp(-((x - 1.5) * (x - 1.5) + y * y) * 4) + std::exp(-((x + 1.5) * (x + 1.5) + y * y) * 4);
  });
  const auto lines = levelset_numeric(g, 0.5);
  REQUIRE(lines.size() == 2);
  CHECK(lines[0].closed);
  CHECK(lines[1].closed);
}

TEST_CASE("contours leaving the grid stay open unless closed at the boundary") {
  const auto g = sampled(0.0, 2.0, 101, [](double x, double y) { return std::exp(-(x * x + y * y)); });
  const auto open = levelset_numeric(g, std::exp(-1.0));
  REQUIRE(open.size() == 1);
  CHECK_FALSE(open[0].closed);
  const auto closed = levelset_numeric(g, std::exp(-1.0), {.close_at_boundary = true});
  REQUIRE(closed.size() == 1);
  CHECK(closed[0].closed);
}

TEST_CASE("saddle cells resolve by the centre value") {
  // Two diagonal corners high, two low, centre above the level: connected.
  const DensityGrid g({{0.0, 1.0}, {0.0, 1.0}}, {1.0, 0.0, 0.0, 1.0});
  const auto joined = levelset_numeric(g, 0.4, {.close_at_boundary = true});
  CHECK(joined.size() == 1);
  const auto split = levelset_numeric(g, 0.6, {.close_at_boundary = true});
  CHECK(split.size() == 2);
}

TEST_CASE("level outside the range is rejected") {
  const auto g = sampled(-1.0, 1.0, 11, [](double x, double y) { return 1.0 - 0.1 * (x * x + y * y); });
  CHECK_THROWS_AS(levelset_numeric(g, 0.0), DomainError);
  CHECK_THROWS_AS(levelset_numeric(g, 1.5), DomainError);
}

TEST_CASE("even-odd containment") {
  Polyline outer{{{-2, -2}, {2, -2}, {2, 2}, {-2, 2}}, true};
  Polyline hole{{{-1, -1}, {1, -1}, {1, 1}, {-1, 1}}, true};
  const std::vector<Polyline> set{outer, hole};
  const ContourIndex idx(set, 16);
  CHECK(idx.contains(1.5, 0.0));
  CHECK_FALSE(idx.contains(0.0, 0.0));
  CHECK_FALSE(idx.contains(3.0, 0.0));
  CHECK_FALSE(idx.contains(0.0, -2.5));
  const ContourIndex empty(std::vector<Polyline>{});
  CHECK_FALSE(empty.contains(0.0, 0.0));
}

TEST_CASE("distances and deviations") {
  const std::vector<Polyline> line{Polyline{{{0, 0}, {1, 0}}, false}};
  CHECK(distance_to_polylines({0.5, 2.0}, line) == doctest::Approx(2.0));
  CHECK(distance_to_polylines({2.0, 0.0}, line) == doctest::Approx(1.0));
  const std::vector<Polyline> probe{Polyline{{{0.5, 0.1}, {0.2, -0.3}}, false}};
  CHECK(max_deviation(probe, line) == doctest::Approx(0.3));
  CHECK(bounding_box_diagonal(line) == doctest::Approx(1.0));
}

TEST_CASE("csv and svg output") {
  const std::vector<Polyline> set{Polyline{{{0, 0}, {1, 0}, {1, 1}}, true}, Polyline{{{2, 2}, {3, 3}}, false}};
  std::ostringstream csv;
  write_polylines_csv(csv, set);
  CHECK(csv.str() == "x,y\n0,0\n1,0\n1,1\n0,0\n\n2,2\n3,3\n");
  std::ostringstream svg;
  write_polylines_svg(svg, set);
  const std::string s = svg.str();
  CHECK(s.find("<svg") != std::string::npos);
  CHECK(s.find("viewBox") != std::string::npos);
  CHECK(s.find("<path") != std::string::npos);
}
