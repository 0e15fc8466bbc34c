#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "pwl/condense.hpp"
#include "pwl/curve.hpp"
#include "pwl/point.hpp"
#include "test_util.hpp"

namespace {

using pwl::CondensedSet;
using pwl::Line;
using pwl::PointSet;
using pwl::WeightedPoint;

// Oracle: the squared-error definition, written out directly.
template <typename F>
double brute_se(F&& f, const PointSet& pts) {
  double se = 0.0;
  for (const WeightedPoint& p : pts) {
    const double r = f(p.x) - p.y;
    se += p.weight * r * r;
  }
  return se;
}

TEST(SquaredError, Examples) {
  EXPECT_EQ(pwl::squared_error([](double) { return 0.0; }, {{1, 1, 2}}), 2.0);
  EXPECT_EQ(pwl::squared_error([](double x) { return x; }, {}), 0.0);
  EXPECT_EQ(pwl::squared_error([](double x) { return x; }, {{0, 1, 1}, {2, 1, 1}}), 2.0);
}

TEST(BestFitLine, Examples) {
  const Line exact = pwl::best_fit_line({{0, 1, 1}, {1, 3, 1}});
  EXPECT_NEAR(exact.m, 2.0, 1e-12);
  EXPECT_NEAR(exact.b, 1.0, 1e-12);

  const Line empty = pwl::best_fit_line({});
  EXPECT_EQ(empty.m, 0.0);
  EXPECT_EQ(empty.b, 0.0);

  const Line vertical = pwl::best_fit_line({{5, 1, 1}, {5, 3, 1}});
  EXPECT_EQ(vertical.m, 0.0);
  EXPECT_NEAR(vertical.b, 2.0, 1e-12);
}

TEST(BestFitLine, PerturbationNeverImproves) {
  auto rng = testutil::make_rng(101);
  for (int trial = 0; trial < 50; ++trial) {
    const PointSet pts = testutil::random_points(rng, 40, -10, 10, -5, 5);
    const Line fit = pwl::best_fit_line(pts);
    const double base = brute_se(fit, pts);
    for (const double dm : {-1e-3, 0.0, 1e-3}) {
      for (const double db : {-1e-3, 0.0, 1e-3}) {
        if (dm == 0.0 && db == 0.0) continue;
        const Line perturbed{fit.m + dm, fit.b + db};
        EXPECT_GE(brute_se(perturbed, pts), base - 1e-9 * (1.0 + base));
      }
    }
  }
}

TEST(LinearCondense, EmptySet) {
  const CondensedSet c = pwl::linear_condense({});
  EXPECT_TRUE(c.points.empty());
  EXPECT_EQ(c.constant, 0.0);
}

TEST(LinearCondense, AllEqualXGivesCentroid) {
  const CondensedSet c = pwl::linear_condense({{5, 1, 1}, {5, 3, 2}});
  ASSERT_EQ(c.points.size(), 1u);
  EXPECT_NEAR(c.points[0].x, 5.0, 1e-12);
  EXPECT_NEAR(c.points[0].y, 7.0 / 3.0, 1e-12);
  EXPECT_NEAR(c.points[0].weight, 3.0, 1e-12);
  EXPECT_NEAR(c.constant, 8.0 / 3.0, 1e-12);
}

TEST(LinearCondense, SymmetricSetIsFixedPoint) {
  const CondensedSet c = pwl::linear_condense({{-1, 0, 1}, {1, 0, 1}});
  ASSERT_EQ(c.points.size(), 2u);
  EXPECT_NEAR(c.points[0].x, -1.0, 1e-12);
  EXPECT_NEAR(c.points[1].x, 1.0, 1e-12);
  EXPECT_NEAR(c.points[0].y, 0.0, 1e-12);
  EXPECT_NEAR(c.points[1].y, 0.0, 1e-12);
  EXPECT_NEAR(c.points[0].weight, 1.0, 1e-12);
  EXPECT_NEAR(c.points[1].weight, 1.0, 1e-12);
  EXPECT_NEAR(c.constant, 0.0, 1e-12);
}

TEST(LinearCondense, TheoremIdentityOnRandomSets) {
  auto rng = testutil::make_rng(202);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = static_cast<std::size_t>(testutil::uniform(rng, 0, 60));
    const PointSet pts = testutil::random_points(rng, n, -100, 100, -20, 20);
    const CondensedSet c = pwl::linear_condense(pts);
    ASSERT_LE(c.points.size(), 2u);
    for (int l = 0; l < 5; ++l) {
      const Line line{testutil::uniform(rng, -5, 5), testutil::uniform(rng, -5, 5)};
      const double full = brute_se(line, pts);
      const double condensed = brute_se(line, c.points) + c.constant;
      EXPECT_NEAR(full, condensed, 1e-8 * (1.0 + full));
    }
  }
}

TEST(LinearCondense, RangeContainmentAndWeightConservation) {
  auto rng = testutil::make_rng(303);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + static_cast<std::size_t>(testutil::uniform(rng, 0, 30));
    const PointSet pts = testutil::random_points(rng, n, -50, 50, -5, 5);
    double x_min = pts[0].x, x_max = pts[0].x;
    for (const WeightedPoint& p : pts) {
      x_min = std::min(x_min, p.x);
      x_max = std::max(x_max, p.x);
    }
    const CondensedSet c = pwl::linear_condense(pts);
    ASSERT_FALSE(c.points.empty());
    const double slack = 1e-9 * (1.0 + std::max(std::abs(x_min), std::abs(x_max)));
    for (const WeightedPoint& p : c.points) {
      EXPECT_GE(p.x, x_min - slack);
      EXPECT_LE(p.x, x_max + slack);
    }
    EXPECT_NEAR(pwl::total_weight(c.points), pwl::total_weight(pts),
                1e-9 * pwl::total_weight(pts));
  }
}

TEST(CondenseAroundKnots, InvalidKnots) {
  EXPECT_THROW(pwl::condense_around_knots({{0, 0, 1}}, {1.0}), std::invalid_argument);
  EXPECT_THROW(pwl::condense_around_knots({{0, 0, 1}}, {1.0, 1.0}), std::invalid_argument);
  EXPECT_THROW(pwl::condense_around_knots({{0, 0, 1}}, {2.0, 1.0}), std::invalid_argument);
}

TEST(CondenseAroundKnots, SingleIntervalMatchesLinearCondense) {
  auto rng = testutil::make_rng(404);
  PointSet pts = testutil::random_points(rng, 50, 2.0, 8.0, -3, 3);
  const CondensedSet direct = pwl::linear_condense(pts);
  const CondensedSet around = pwl::condense_around_knots(pts, {2.0, 8.0});
  ASSERT_EQ(direct.points.size(), around.points.size());
  for (std::size_t i = 0; i < direct.points.size(); ++i) {
    EXPECT_EQ(direct.points[i].x, around.points[i].x);
    EXPECT_EQ(direct.points[i].y, around.points[i].y);
    EXPECT_EQ(direct.points[i].weight, around.points[i].weight);
  }
  EXPECT_EQ(direct.constant, around.constant);
}

TEST(CondenseAroundKnots, CollinearPointsStayOnLineWithZeroConstant) {
  auto rng = testutil::make_rng(505);
  const Line line{1.5, -2.0};
  PointSet pts;
  for (int i = 0; i < 200; ++i) {
    const double x = testutil::uniform(rng, 0, 10);
    pts.push_back({x, line(x), testutil::uniform(rng, 0.5, 2.0)});
  }
  const CondensedSet c = pwl::condense_around_knots(pts, {0.0, 2.5, 5.0, 7.5, 10.0});
  EXPECT_NEAR(c.constant, 0.0, 1e-9);
  for (const WeightedPoint& p : c.points) {
    EXPECT_NEAR(p.y, line(p.x), 1e-9);
  }
}

TEST(CondenseAroundKnots, CurveIdentityWithBruteForceOracle) {
  auto rng = testutil::make_rng(606);
  const PointSet pts = testutil::random_points(rng, 1000, -20, 120, -10, 10);
  const std::vector<double> knots = {0.0, 10.0, 30.0, 70.0, 100.0};
  const CondensedSet c = pwl::condense_around_knots(pts, knots);
  EXPECT_LE(c.points.size(), 2 * (knots.size() - 1));

  for (int trial = 0; trial < 20; ++trial) {
    // Random curve whose x-knots are a subset of the condensation knots.
    std::vector<pwl::ControlPoint> cps;
    for (double k : knots) {
      if (cps.size() < 2 || testutil::uniform(rng, 0, 1) < 0.7) {
        cps.push_back({k, testutil::uniform(rng, -10, 10)});
      }
    }
    const pwl::PWLCurve curve("f", cps);
    const double full = brute_se(curve, pts);
    const double condensed = brute_se(curve, c.points) + c.constant;
    EXPECT_NEAR(full, condensed, 1e-8 * (1.0 + full));
  }
}

TEST(CondenseAroundKnots, CurveDifferenceIdentity) {
  auto rng = testutil::make_rng(707);
  for (int trial = 0; trial < 30; ++trial) {
    const PointSet pts = testutil::random_points(rng, 300, 0, 50, -4, 4);
    const std::vector<double> knots = testutil::random_sorted_distinct(rng, 6, -5, 55, 0.5);
    const CondensedSet c = pwl::condense_around_knots(pts, knots);

    auto random_curve = [&] {
      std::vector<pwl::ControlPoint> cps;
      for (double k : knots) cps.push_back({k, testutil::uniform(rng, -4, 4)});
      return pwl::PWLCurve("f", cps);
    };
    const pwl::PWLCurve c1 = random_curve();
    const pwl::PWLCurve c2 = random_curve();
    const double lhs = brute_se(c1, pts) - brute_se(c2, pts);
    const double rhs = brute_se(c1, c.points) - brute_se(c2, c.points);
    EXPECT_NEAR(lhs, rhs, 1e-8 * (1.0 + std::abs(lhs)));
  }
}

TEST(CondenseAroundKnots, EmptyPartitionsContributeNoPoints) {
  auto rng = testutil::make_rng(909);
  // Data only near the ends; the middle two partitions stay empty.
  PointSet pts;
  for (int i = 0; i < 100; ++i) {
    pts.push_back({testutil::uniform(rng, 0, 1), testutil::uniform(rng, -1, 1), 1.0});
    pts.push_back({testutil::uniform(rng, 9, 10), testutil::uniform(rng, -1, 1), 1.0});
  }
  const std::vector<double> knots = {0.0, 1.0, 5.0, 9.0, 10.0};
  const CondensedSet c = pwl::condense_around_knots(pts, knots);
  EXPECT_LE(c.points.size(), 4u);
  for (const WeightedPoint& p : c.points) {
    EXPECT_TRUE(p.x <= 1.0 || p.x >= 9.0);
    EXPECT_GT(p.weight, 0.0);
  }
  // The identity still holds for curves with knots in K.
  const pwl::PWLCurve curve("f", {{0, 1}, {5, -1}, {10, 2}});
  const double full = brute_se(curve, pts);
  EXPECT_NEAR(brute_se(curve, c.points) + c.constant, full, 1e-8 * (1.0 + full));
}

TEST(CondenseAroundKnots, PartitionWeightConservation) {
  auto rng = testutil::make_rng(808);
  const PointSet pts = testutil::random_points(rng, 500, 0, 10, -1, 1);
  const std::vector<double> knots = {0.0, 2.0, 4.0, 6.0, 8.0, 10.0};
  const CondensedSet c = pwl::condense_around_knots(pts, knots);

  // Per partition: condensed weight equals the partition's source weight.
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    const bool last = i + 2 == knots.size();
    auto in_part = [&](double x) {
      return x >= knots[i] && (last ? x <= knots[i + 1] : x < knots[i + 1]);
    };
    double w_src = 0.0;
    for (const WeightedPoint& p : pts) {
      if (in_part(std::clamp(p.x, knots.front(), knots.back()))) w_src += p.weight;
    }
    double w_cond = 0.0;
    for (const WeightedPoint& p : c.points) {
      if (in_part(p.x)) w_cond += p.weight;
    }
    EXPECT_NEAR(w_cond, w_src, 1e-9 * (1.0 + w_src));
  }
}

}  // namespace
