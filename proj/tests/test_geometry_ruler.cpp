#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include <gtest/gtest.h>
#include <json.hpp>

#include "rspace/geometry.hpp"
#include "rspace/quantum_ruler.hpp"

using namespace rspace;
using namespace rspace::geo;

namespace {

PointSet line(const std::vector<double>& xs) {
  std::vector<Point> pts;
  for (std::size_t k = 0; k < xs.size(); ++k) pts.push_back(Point{static_cast<Label>(k), xs[k], 0.0});
  return PointSet(1, pts);
}

PointSet grid_line(const std::vector<std::int64_t>& xs) {
  std::vector<std::pair<std::int64_t, std::int64_t>> xy;
  for (auto x : xs) xy.emplace_back(x, 0);
  return PointSet::from_grid(xy);
}

PointSet from_json(const nlohmann::json& pts) {
  std::vector<Point> out;
  for (const auto& p : pts) out.push_back(Point{p.at("label").get<Label>(), p.at("x").get<double>(), p.at("y").get<double>()});
  return PointSet(2, out);
}

nlohmann::json load(const std::string& name) {
  std::ifstream f(std::string(RSPACE_TEST_DATA) + "/" + name);
  EXPECT_TRUE(f.good()) << name;
  return nlohmann::json::parse(f);
}

double gaussian(double x, double var) { return std::exp(-x * x / (2 * var)) / std::sqrt(2 * std::numbers::pi * var); }

}  // namespace

TEST(ClosestPoint, Cases) {
  EXPECT_EQ(closest_point(0, line({0, 5})), std::vector<Label>{1});
  EXPECT_EQ(closest_point(0, line({0, 1, 3})), std::vector<Label>{1});
  EXPECT_EQ(closest_point(1, line({-2, 0, 2})), (std::vector<Label>{0, 2}));
  EXPECT_EQ(closest_point(0, line({0, 1, 3}), {1}), std::vector<Label>{2});
  EXPECT_THROW((void)closest_point(0, line({0})), ValidationError);
}

TEST(Nng, LineChain) {
  const auto s = grid_line({0, 1, 2, 3});
  EXPECT_EQ(nng_delta(0, 3, s), 3);
  EXPECT_EQ(nng_delta(3, 0, s), 3);
  EXPECT_EQ(nng_distance(0, 3, s), 3.0);
  EXPECT_EQ(nng_delta(0, 1, grid_line({0, 4})), 1);
  EXPECT_EQ(nng_distance(0, 1, grid_line({0, 4})), 1.0);
  EXPECT_EQ(nng_distance(2, 2, s), 0.0);
}

TEST(Nng, TableMatchesReference) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> c(0, 6), n(2, 8);
  for (int t = 0; t < 300; ++t) {
    std::set<std::pair<std::int64_t, std::int64_t>> pts;
    const int k = n(rng);
    while (static_cast<int>(pts.size()) < k) pts.emplace(c(rng), c(rng));
    const std::vector<std::pair<std::int64_t, std::int64_t>> xy(pts.begin(), pts.end());
    const auto s = PointSet::from_grid(xy);
    const auto table = nng_delta_table(xy);
    for (Label a = 0; a < k; ++a)
      for (Label b = 0; b < k; ++b)
        if (a != b) ASSERT_EQ(table[a][b], nng_delta(a, b, s));
  }
}

TEST(Nng, AxiomsOnRandomSets) {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> c(0, 9);
  for (int t = 0; t < 50; ++t) {
    std::set<std::pair<std::int64_t, std::int64_t>> pts;
    while (pts.size() < 7) pts.emplace(c(rng), c(rng));
    const auto s = PointSet::from_grid({pts.begin(), pts.end()});
    const auto r = semi_metric_check(s.labels(), [&](Label a, Label b) { return nng_distance(a, b, s); });
    EXPECT_TRUE(r.symmetric);
    EXPECT_TRUE(r.identity);
  }
}

TEST(Nng, AsymmetryRegressionFixture) {
  const auto j = load("nng_asymmetry.json");
  const auto s = from_json(j.at("points"));
  const Label a = j.at("a"), b = j.at("b");
  EXPECT_EQ(nng_delta(a, b, s), j.at("delta_ab").get<int>());
  EXPECT_EQ(nng_delta(b, a, s), j.at("delta_ba").get<int>());
  EXPECT_NE(nng_delta(a, b, s), nng_delta(b, a, s));
  const auto found = find_nng_asymmetry(5, 4);
  ASSERT_TRUE(found.has_value());
  EXPECT_EQ(found->delta_ab, j.at("delta_ab").get<int>());
}

TEST(TDistance, OneDimensional) {
  const auto s = line({0, 1, 2, 3});
  EXPECT_EQ(t_distance_1d(0, 3, s), 2);
  EXPECT_EQ(t_distance_1d(0, 1, s), 0);
  EXPECT_EQ(t_distance_1d(2, 2, s), 0);
  EXPECT_THROW((void)t_distance_1d(0, 1, grid_line({0, 1})), ValidationError);
}

TEST(TDistance, OneDimensionalIdentityFailure) {
  const auto s = line({0, 1, 2});
  const auto r = semi_metric_check(s.labels(), [&](Label a, Label b) { return t_distance_1d(a, b, s); });
  EXPECT_FALSE(r.identity);
  ASSERT_TRUE(r.identity_failure.has_value());
}

TEST(TDistance, SingleTriangle) {
  const auto s = PointSet::from_grid({{0, 0}, {4, 0}, {0, 3}});
  EXPECT_EQ(t_distance_2d(0, 1, s), 1);
  EXPECT_EQ(t_distance_2d(0, 0, s), 0);
}

TEST(TDistance, ConvexQuadDiagonal) {
  const auto s = PointSet::from_grid({{0, 0}, {3, 0}, {3, 2}, {0, 2}});
  const auto t = tessellate(s);
  ASSERT_EQ(t.triangles.size(), 2u);
  EXPECT_TRUE(t.complete);
  EXPECT_EQ(t_distance_2d(0, 2, t), 2);
  EXPECT_EQ(t_distance_2d(1, 3, t), 2);
}

TEST(TDistance, CollinearRejected) { EXPECT_THROW((void)tessellate(grid_line({0, 1, 2, 5})), ValidationError); }

TEST(Tessellation, TrianglesEmptyAndPickArea) {
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> c(0, 7);
  for (int t = 0; t < 100; ++t) {
    std::set<std::pair<std::int64_t, std::int64_t>> pts;
    while (pts.size() < 8) pts.emplace(c(rng), c(rng));
    const auto s = PointSet::from_grid({pts.begin(), pts.end()});
    Tessellation tes;
    try {
      tes = tessellate(s);
    } catch (const ValidationError&) {
      continue;
    }
    EXPECT_TRUE(tes.complete);
    for (const auto& tr : tes.triangles) {
      EXPECT_TRUE(triangle_is_empty(tes, tr));
      const auto& a = tes.points[tr.v[0]];
      const auto& b = tes.points[tr.v[1]];
      const auto& cc = tes.points[tr.v[2]];
      EXPECT_EQ(tr.twice_area, std::abs(orient(a, b, cc)));
      EXPECT_EQ(tr.twice_area, 2 * tr.interior + tr.boundary - 2);
    }
  }
}

TEST(TDistance, ViolationRegressionFixture) {
  const auto j = load("t_violation.json");
  const auto s = from_json(j.at("points"));
  const auto t = tessellate(s);
  const Label a = j.at("a"), c = j.at("c"), b = j.at("b");
  EXPECT_EQ(t_distance_2d(a, c, t), j.at("d_ac").get<int>());
  EXPECT_EQ(t_distance_2d(c, b, t), j.at("d_cb").get<int>());
  EXPECT_EQ(t_distance_2d(a, b, t), j.at("d_ab").get<int>());
  EXPECT_LT(t_distance_2d(a, c, t) + t_distance_2d(c, b, t), t_distance_2d(a, b, t));
  for (const auto& tr : t.triangles) EXPECT_TRUE(triangle_is_empty(t, tr));
}

TEST(Predicates, Incircle) {
  const IPoint a{0, 0}, b{2, 0}, c{0, 2};
  EXPECT_GT(incircle(a, b, c, IPoint{1, 1}), 0);
  EXPECT_EQ(incircle(a, b, c, IPoint{2, 2}), 0);
  EXPECT_LT(incircle(a, b, c, IPoint{3, 3}), 0);
  EXPECT_TRUE(segments_meet({0, 0}, {2, 2}, {0, 2}, {2, 0}));
  EXPECT_TRUE(segments_meet({0, 0}, {2, 0}, {2, 0}, {3, 5}));
  EXPECT_FALSE(segments_meet({0, 0}, {1, 0}, {2, 0}, {3, 0}));
}

TEST(Ruler, UnitOverlapAtMean) {
  ruler::RulerSpec s;
  s.centers = {0.0};
  EXPECT_NEAR(ruler::flip_probability(s, {0.0, 1.0}, 0), 1.0 / std::sqrt(4 * std::numbers::pi), 1e-10);
}

TEST(Ruler, VanishesMonotonically) {
  double prev = std::numeric_limits<double>::infinity();
  for (double x = 0.0; x <= 9.0; x += 1.0) {
    ruler::RulerSpec s;
    s.centers = {x};
    const double v = ruler::flip_probability(s, {0.0, 1.0}, 0);
    EXPECT_LT(v, prev);
    prev = v;
  }
  EXPECT_LT(prev, 1e-8);
}

TEST(Ruler, RandomSpecsAgainstClosedForm) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 100; ++t) {
    const ruler::GaussianWavefunction phi{4 * u(rng) - 2, 0.2 + 2 * u(rng)};
    ruler::RulerSpec s = ruler::RulerSpec::uniform(1 + static_cast<std::size_t>(u(rng) * 5), 0.05 + 1.5 * u(rng), -5, 5);
    for (std::size_t i = 0; i < s.centers.size(); ++i) {
      const double oracle = gaussian(s.centers[i] - phi.mean, s.sigma * s.sigma + phi.width * phi.width);
      EXPECT_NEAR(ruler::flip_probability(s, phi, i), oracle, 1e-9);
    }
  }
}

TEST(Ruler, ArbitraryDensity) {
  // box density of width 2 centred at 0 against a unit Gaussian: erf(1/sqrt2)/2
  const double v = ruler::flip_probability([](double) { return 0.5; }, -1.0, 1.0, {0.0, 1.0}, 1e-14);
  EXPECT_NEAR(v, 0.5 * std::erf(1.0 / std::sqrt(2.0)), 1e-12);
}

TEST(Ruler, DenseLimit) {
  const ruler::GaussianWavefunction phi{0.0, 1.0};
  std::vector<std::pair<std::size_t, double>> grid;
  for (double f : {1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 100.0}) grid.emplace_back(9, 1.0 / f);
  const auto rows = ruler::dense_limit_study(grid, phi, -4, 4);
  for (std::size_t k = 1; k < rows.size(); ++k) EXPECT_LT(rows[k].max_rel_error, rows[k - 1].max_rel_error);
  EXPECT_LT(rows.back().max_rel_error, 0.01);
}

TEST(Ruler, FlipDistributionNormalizes) {
  const auto s = ruler::RulerSpec::uniform(7, 0.3, -3, 3);
  const auto fd = ruler::flip_distribution(s, {0.5, 1.0});
  double t = 0.0;
  for (double p : fd.normalized.probs()) t += p;
  EXPECT_NEAR(t, 1.0, 1e-12);
  EXPECT_NEAR(fd.normalized.prob(2) * fd.raw_sum, fd.raw[2], 1e-15);
}

TEST(Ruler, Validation) {
  ruler::RulerSpec s;
  EXPECT_THROW(s.validate(), ValidationError);
  s.centers = {0.0};
  s.sigma = 0.0;
  EXPECT_THROW(s.validate(), ValidationError);
}
