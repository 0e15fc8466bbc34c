#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "pwl/codegen.hpp"
#include "pwl/curve.hpp"
#include "pwl/model.hpp"
#include "test_util.hpp"

namespace {

using pwl::CurveComponent;
using pwl::EnumCurve;
using pwl::PWLCurve;
using pwl::Transform;
using pwl::detail::format_significant;

TEST(FormatSignificant, RoundingAndRendering) {
  EXPECT_EQ(format_significant(3.14159, 4), "3.142");
  EXPECT_EQ(format_significant(18.0, 4), "18");
  EXPECT_EQ(format_significant(-0.04099, 4), "-0.04099");
  EXPECT_EQ(format_significant(0.0198, 4), "0.0198");
  EXPECT_EQ(format_significant(2.146, 4), "2.146");
  EXPECT_EQ(format_significant(0.0, 4), "0");
  EXPECT_EQ(format_significant(-0.0, 4), "0");
  EXPECT_EQ(format_significant(1e15, 4), "1000000000000000");
  EXPECT_EQ(format_significant(1e16, 4), "1e+16");
  EXPECT_EQ(format_significant(1e-5, 4), "1e-05");
  EXPECT_EQ(format_significant(0.0001, 4), "0.0001");
  EXPECT_EQ(format_significant(12345.0, 2), "12000");
}

TEST(FormatSignificant, HalfEvenOnExactTies) {
  // These values are exactly representable, so the tie is real.
  EXPECT_EQ(format_significant(0.25, 1), "0.2");
  EXPECT_EQ(format_significant(0.75, 1), "0.8");
  EXPECT_EQ(format_significant(1.5, 1), "2");
  EXPECT_EQ(format_significant(2.5, 1), "2");
  EXPECT_EQ(format_significant(-0.25, 1), "-0.2");
}

TEST(EmitCurveLiteral, ListingShape) {
  const PWLCurve age("age", {{18, 3.13}, {21, 0.5914}, {46, -0.7206}}, Transform::kLog);
  EXPECT_EQ(pwl::emit_curve_literal(age),
            "PWLCurve(\"age\", [(18, 3.13), (21, 0.5914), (46, -0.7206)], fx=\"log\")");

  const PWLCurve plain("f", {{0, 0}, {1, 1}});
  EXPECT_EQ(pwl::emit_curve_literal(plain), "PWLCurve(\"f\", [(0, 0), (1, 1)])");

  const EnumCurve charge("c_charge_degree", {{1, 0.0198}, {2, -0.0384}});
  EXPECT_EQ(pwl::emit_curve_literal(charge),
            "EnumCurve(\"c_charge_degree\", {1: 0.0198, 2: -0.0384})");

  const EnumCurve with_default("d", {{1, 2.0}}, 0.5);
  EXPECT_EQ(pwl::emit_curve_literal(with_default), "EnumCurve(\"d\", {1: 2}, default=0.5)");
}

TEST(EmitCurveLiteral, SigDigitsRounding) {
  const PWLCurve c("f", {{0, 3.14159}, {1, 1}});
  EXPECT_EQ(pwl::emit_curve_literal(c, 4), "PWLCurve(\"f\", [(0, 3.142), (1, 1)])");
  EXPECT_EQ(pwl::emit_curve_literal(c, 2), "PWLCurve(\"f\", [(0, 3.1), (1, 1)])");
}

TEST(EmitModelCode, StableOrderAndBias) {
  const pwl::CurveModel model(
      {
          CurveComponent(PWLCurve("b_feature", {{0, 1}, {1, 2}})),
          CurveComponent(EnumCurve("a_feature", {{2, 0.5}, {1, -0.5}})),
      },
      0.25);
  const std::string code = pwl::emit_model_code(model);
  const std::string expected =
      "score = sum([\n"
      "  0.25,\n"
      "  PWLCurve(\"b_feature\", [(0, 1), (1, 2)]),\n"
      "  EnumCurve(\"a_feature\", {1: -0.5, 2: 0.5}),\n"
      "])\n";
  EXPECT_EQ(code, expected);
  EXPECT_EQ(code, pwl::emit_model_code(model));
}

TEST(ParseCurveLiteral, ListingRoundTrip) {
  const CurveComponent parsed = pwl::parse_curve_literal(
      R"(PWLCurve("age", [(18, 3.13), (21, 0.5914), (46, -0.7206)], fx="log"))");
  const auto& curve = std::get<PWLCurve>(parsed);
  EXPECT_EQ(curve.name(), "age");
  EXPECT_EQ(curve.fx(), Transform::kLog);
  ASSERT_EQ(curve.points().size(), 3u);
  EXPECT_EQ(curve.points()[0].x, 18.0);
  EXPECT_EQ(curve.points()[0].y, 3.13);
  EXPECT_EQ(curve.points()[2].y, -0.7206);
}

TEST(ParseCurveLiteral, DefaultTransformIsIdentity) {
  const auto parsed = pwl::parse_curve_literal(R"(PWLCurve("f", [(0,0),(1,1)]))");
  EXPECT_EQ(std::get<PWLCurve>(parsed).fx(), Transform::kIdentity);
}

TEST(ParseCurveLiteral, EnumWithDefault) {
  const auto parsed =
      pwl::parse_curve_literal(R"(EnumCurve("e", {1: 0.5, 2: -0.5}, default=0.125))");
  const auto& curve = std::get<EnumCurve>(parsed);
  EXPECT_EQ(curve.eval(1), 0.5);
  EXPECT_EQ(curve.eval(42), 0.125);
}

TEST(ParseCurveLiteral, EmptyEnumRoundTrip) {
  const EnumCurve empty("e", {});
  const std::string text = pwl::emit_curve_literal(empty);
  EXPECT_EQ(text, "EnumCurve(\"e\", {})");
  const auto parsed = pwl::parse_curve_literal(text);
  EXPECT_EQ(std::get<EnumCurve>(parsed).eval(5), 0.0);
}

TEST(ParseCurveLiteral, Errors) {
  EXPECT_THROW(pwl::parse_curve_literal(R"(PWLCurve("f", [(0,0),(1,1))"), pwl::ParseError);
  EXPECT_THROW(pwl::parse_curve_literal(R"(PWLCurve("f", [(1,0),(1,1)]))"), pwl::ParseError);
  EXPECT_THROW(pwl::parse_curve_literal(R"(PWLCurve("f", [(2,0),(1,1)]))"), pwl::ParseError);
  EXPECT_THROW(pwl::parse_curve_literal(R"(PWLCurve("f", [(0,0),(1,1)], fx="exp"))"),
               pwl::ParseError);
  EXPECT_THROW(pwl::parse_curve_literal(R"(EnumCurve("e", {1: 0.5, 1: 1.0}))"), pwl::ParseError);
  EXPECT_THROW(pwl::parse_curve_literal(R"(SplineCurve("f", [(0,0)]))"), pwl::ParseError);
  EXPECT_THROW(pwl::parse_curve_literal(R"(PWLCurve("f", [(0,0),(1,1)]) extra)"),
               pwl::ParseError);
}

TEST(ParseCurveLiteral, ReportsPosition) {
  try {
    pwl::parse_curve_literal("PWLCurve(\"f\",\n  [(0,0),(oops,1)])");
    FAIL() << "expected ParseError";
  } catch (const pwl::ParseError& e) {
    EXPECT_EQ(e.line(), 2);
    EXPECT_GT(e.column(), 1);
  }
}

// Grid keeps x-knots exact at 4 significant digits, isolating y-rounding.
double grid_value(std::mt19937_64& rng, double lo, double hi) {
  const double step = 0.25;
  const auto k = static_cast<long long>(testutil::uniform(rng, lo / step, hi / step));
  return static_cast<double>(k) * step;
}

TEST(RoundTrip, SeventeenDigitsIsBitExact) {
  auto rng = testutil::make_rng(61);
  for (int trial = 0; trial < 500; ++trial) {
    CurveComponent original = [&]() -> CurveComponent {
      if (trial % 3 == 2) {
        std::map<double, double> mapping;
        const int n = 1 + static_cast<int>(testutil::uniform(rng, 0, 6));
        for (int i = 0; i < n; ++i) {
          mapping[std::floor(testutil::uniform(rng, -20, 20))] =
              testutil::uniform(rng, -5, 5);
        }
        return EnumCurve("e", std::move(mapping), testutil::uniform(rng, -1, 1));
      }
      const std::size_t k = 2 + static_cast<std::size_t>(testutil::uniform(rng, 0, 5));
      const std::vector<double> xs = testutil::random_sorted_distinct(rng, k, -100, 100, 1e-4);
      std::vector<pwl::ControlPoint> cps;
      for (double x : xs) cps.push_back({x, testutil::uniform(rng, -50, 50)});
      return PWLCurve("f", std::move(cps));
    }();

    const CurveComponent parsed = pwl::parse_curve_literal(pwl::emit_curve_literal(original, 17));
    for (int i = 0; i < 100; ++i) {
      const double x = testutil::uniform(rng, -120, 120);
      const double a = pwl::component_eval(original, x);
      const double b = pwl::component_eval(parsed, x);
      EXPECT_EQ(a, b);
    }
  }
}

TEST(RoundTrip, FourDigitsWithinRelativeTolerance) {
  auto rng = testutil::make_rng(62);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t k = 2 + static_cast<std::size_t>(testutil::uniform(rng, 0, 4));
    std::vector<double> xs;
    while (xs.size() < k) {
      const double x = grid_value(rng, -50, 50);
      if (std::find(xs.begin(), xs.end(), x) == xs.end()) xs.push_back(x);
    }
    std::sort(xs.begin(), xs.end());
    std::vector<pwl::ControlPoint> cps;
    double y_scale = 0.0;
    for (double x : xs) {
      const double y = testutil::uniform(rng, -10, 10);
      cps.push_back({x, y});
      y_scale = std::max(y_scale, std::abs(y));
    }
    const PWLCurve original("f", cps);
    const auto parsed = pwl::parse_curve_literal(pwl::emit_curve_literal(original, 4));
    for (int i = 0; i < 50; ++i) {
      const double x = testutil::uniform(rng, xs.front(), xs.back());
      EXPECT_NEAR(pwl::component_eval(parsed, x), original.eval(x), 1e-3 * y_scale);
    }
  }
}

}  // namespace
