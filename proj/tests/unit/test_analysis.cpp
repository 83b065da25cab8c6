#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "drivestat/analysis.hpp"
#include "drivestat/bivariate.hpp"
#include "drivestat/error.hpp"
#include "drivestat/rng.hpp"

using namespace drivestat;

TEST_CASE("quadrant decomposition") {
  const PointSet s(2, {-1.0, 0.5, 2.0, -0.3});
  const auto q = decompose_quadrants(s);
  CHECK(q.brake == std::vector<double>{1.0});
  CHECK(q.forward == std::vector<double>{2.0});
  CHECK(q.left == std::vector<double>{0.3});
  CHECK(q.right == std::vector<double>{0.5});
  CHECK(q.lateral() == std::vector<double>{0.3, 0.5});

  const auto zeros = decompose_quadrants(PointSet(2, std::vector<double>(6, 0.0)));
  CHECK(zeros.forward.size() == 3);
  CHECK(zeros.right.size() == 3);
  CHECK(zeros.brake.empty());
  CHECK(zeros.left.empty());
  CHECK_THROWS(decompose_quadrants(PointSet(2, {})));
}

TEST_CASE("decomposition conserves counts") {
  const auto s = bpdm_sample(10000, BpdmParams::reference(), 2);
  const auto q = decompose_quadrants(s);
  CHECK(q.brake.size() + q.forward.size() == s.size());
  CHECK(q.left.size() + q.right.size() == s.size());
}

TEST_CASE("nearest-rank percentiles") {
  const std::vector<double> v{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  CHECK(nearest_rank_percentile(v, 90.0) == 9.0);
  CHECK(nearest_rank_percentile(v, 91.0) == 10.0);
  CHECK(nearest_rank_percentile(v, 100.0) == 10.0);
  CHECK(nearest_rank_percentile(v, 5.0) == 1.0);
  std::vector<double> big(10000);
  for (std::size_t i = 0; i < big.size(); ++i) big[i] = static_cast<double>(i + 1);
  CHECK(nearest_rank_percentile(big, 99.99) == 9999.0);
  CHECK_THROWS_AS(nearest_rank_percentile(v, 0.0), ParameterError);
  CHECK_THROWS_AS(nearest_rank_percentile(std::vector<double>{}, 50.0), DegenerateError);
}

TEST_CASE("uniform edges cover the maximum") {
  CHECK(uniform_edges(0.0, 0.5, 1.2) == std::vector<double>{0.0, 0.5, 1.0, 1.5});
  CHECK(uniform_edges(0.0, 0.5, 1.0) == std::vector<double>{0.0, 0.5, 1.0});
  CHECK(uniform_edges(0.0, 0.5, 0.0) == std::vector<double>{0.0, 0.5});
}

TEST_CASE("percentile table: single bin equals plain percentiles") {
  const auto s = bpdm_sample(50000, BpdmParams::reference(), 4);
  const std::vector<double> edges{0.0, 1e9};
  const auto t = percentile_by_interval(s, Axis::ay, Axis::ax, edges);
  REQUIRE(t.rows.size() == 1);
  auto mags = s.column(1);
  for (auto& m : mags) m = std::fabs(m);
  std::sort(mags.begin(), mags.end());
  for (std::size_t l = 0; l < t.levels.size(); ++l)
    CHECK(*t.rows[0].values[l] == nearest_rank_percentile(mags, t.levels[l]));
  for (std::size_t l = 1; l < t.levels.size(); ++l) CHECK(*t.rows[0].values[l] >= *t.rows[0].values[l - 1]);
}

TEST_CASE("percentile of a large gpd sample") {
  const auto x = gpd_sample(1000000, {0.3, 0.136}, 5);
  PointSet s(2, {});
  for (const double v : x) {
    s.coords.push_back(0.0);
    s.coords.push_back(v);
  }
  const std::vector<double> edges{0.0, 1.0};
  const std::vector<double> levels{99.0};
  const auto t = percentile_by_interval(s, Axis::ay, Axis::ax, edges, levels);
  CHECK(*t.rows[0].values[0] == doctest::Approx(1.3514191731758542).epsilon(0.02));
}

TEST_CASE("underpopulated bins are flagged absent") {
  const auto s = bpdm_sample(3000, BpdmParams::reference(), 6);
  const std::vector<double> edges{0.0, 1.5, 100.0};
  const auto t = percentile_by_interval(s, Axis::ay, Axis::ax, edges, kDefaultPercentiles, 1000);
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[0].present());
  CHECK_FALSE(t.rows[1].present());
  CHECK(t.rows[1].count > 0);
  CHECK(t.rows[0].count + t.rows[1].count == 3000);
}

TEST_CASE("independent axes give flat percentile rows") {
  const auto s = bpdm_sample(400000, BpdmParams::reference(), 7);
  const std::vector<double> edges{0.0, 0.25, 0.5, 1.0};
  const std::vector<double> levels{90.0};
  const auto t = percentile_by_interval(s, Axis::ay, Axis::ax, edges, levels);
  // Order-statistic interval for the 90th percentile; values are within a
  // few standard errors of one another.
  auto mags = s.column(1);
  for (auto& m : mags) m = std::fabs(m);
  std::sort(mags.begin(), mags.end());
  const double pooled = nearest_rank_percentile(mags, 90.0);
  for (const auto& row : t.rows) CHECK(*row.values[0] == doctest::Approx(pooled).epsilon(0.04));
}

TEST_CASE("fit battery: single bin equals rank_models on the whole series") {
  const auto s = bpdm_sample(5000, BpdmParams::reference(), 8);
  const std::vector<double> edges{0.0, 1e9};
  const auto fits = conditional_fit_battery(s, Axis::ax, Axis::ay, edges);
  REQUIRE(fits.size() == 1);
  auto mags = s.column(1);
  for (auto& m : mags) m = std::fabs(m);
  const auto direct = rank_models(mags);
  CHECK(fits[0].ranking->fit(Model::gpd).logL == direct.fit(Model::gpd).logL);
  CHECK(fits[0].ranking->by_aic == direct.by_aic);
  CHECK_THROWS_AS(conditional_fit_battery(s, Axis::ax, Axis::ay, std::vector<double>{100.0, 200.0}), DegenerateError);
}

TEST_CASE("relative contours: mass decreases with the level") {
  Rng rng(9);
  PointSet s(2, std::vector<double>(2 * 20000));
  for (auto& v : s.coords) v = rng.normal();
  const std::vector<double> levels{0.01, 0.1, 0.5, 0.9, 1.0};
  const auto r = relative_density_contours(s, levels);
  REQUIRE(r.contours.size() == levels.size());
  for (std::size_t i = 1; i < r.contours.size(); ++i)
    CHECK(r.contours[i].mass_inside < r.contours[i - 1].mass_inside);
  CHECK(r.contours.back().mass_inside < 0.001);
  CHECK(r.contours[2].mass_inside == doctest::Approx(0.5).epsilon(0.06));
  CHECK_THROWS_AS(relative_density_contours(PointSet(2, std::vector<double>(200, 0.5)), levels), DegenerateError);
}

TEST_CASE("velocity profile needs a velocity column") {
  const auto s = bpdm_sample(2000, BpdmParams::reference(), 10);
  CHECK_THROWS_AS(velocity_profile(s, std::vector<double>{0.0, 5.0}), DataError);
  PointSet v(3, {});
  for (std::size_t i = 0; i < s.size(); ++i) {
    v.coords.push_back(s.at(i, 0));
    v.coords.push_back(s.at(i, 1));
    v.coords.push_back(static_cast<double>(i % 10));
  }
  const auto r = velocity_profile(v, std::vector<double>{0.0, 5.0, 10.0}, kDefaultPercentiles, 100);
  REQUIRE(r.bins.size() == 2);
  CHECK(r.bins[0].count + r.bins[1].count == 2000);
  CHECK(r.bins[0].sections[0].fit.has_value());
  CHECK(r.velocity_density.mass() == doctest::Approx(1.0).epsilon(0.01));
  v.coords[2] = -1.0;
  CHECK_THROWS_AS(velocity_profile(v, std::vector<double>{0.0, 5.0}), DomainError);
}
