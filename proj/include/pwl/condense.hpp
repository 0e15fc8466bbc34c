#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "pwl/point.hpp"

namespace pwl {

struct Line {
  double m = 0.0;
  double b = 0.0;

  double operator()(double x) const { return m * x + b; }
};

// Weighted squared error of any callable f over a point set; 0 for the empty set.
template <typename F>
double squared_error(F&& f, const PointSet& pts) {
  double se = 0.0;
  for (const WeightedPoint& p : pts) {
    const double r = f(p.x) - p.y;
    se += p.weight * r * r;
  }
  return se;
}

namespace detail {

// All-equal-x guard, relative to the magnitude of the x-values themselves.
// Below this spread the w1/w2 construction would divide by ~0.
inline bool x_spread_degenerate(double x_min, double x_max) {
  const double scale = std::max(std::abs(x_min), std::abs(x_max));
  return (x_max - x_min) <= 1e-12 * scale;
}

struct Moments {
  double sum_w = 0.0;
  double mean_x = 0.0;
  double mean_y = 0.0;
  double x_min = 0.0;
  double x_max = 0.0;
};

inline Moments weighted_means(const PointSet& pts) {
  Moments m;
  m.x_min = pts.front().x;
  m.x_max = pts.front().x;
  double sx = 0.0, sy = 0.0;
  for (const WeightedPoint& p : pts) {
    m.sum_w += p.weight;
    sx += p.weight * p.x;
    sy += p.weight * p.y;
    m.x_min = std::min(m.x_min, p.x);
    m.x_max = std::max(m.x_max, p.x);
  }
  m.mean_x = sx / m.sum_w;
  m.mean_y = sy / m.sum_w;
  return m;
}

}  // namespace detail

// Weighted least-squares line. Degenerate cases follow fixed tie-breaks:
// the empty set gives y = 0, and an all-equal-x set gives the horizontal
// line through the weighted mean y.
inline Line best_fit_line(const PointSet& pts) {
  if (pts.empty()) return {0.0, 0.0};
  const detail::Moments m = detail::weighted_means(pts);
  if (detail::x_spread_degenerate(m.x_min, m.x_max)) return {0.0, m.mean_y};
  double sxx = 0.0, sxy = 0.0;
  for (const WeightedPoint& p : pts) {
    const double dx = p.x - m.mean_x;
    sxx += p.weight * dx * dx;
    sxy += p.weight * dx * (p.y - m.mean_y);
  }
  if (sxx <= 0.0) return {0.0, m.mean_y};
  const double slope = sxy / sxx;
  return {slope, m.mean_y - slope * m.mean_x};
}

// Condensed stand-in for a point set: at most two synthetic points per source
// partition plus a curve-independent squared-error offset.
struct CondensedSet {
  PointSet points;
  double constant = 0.0;
};

// Collapses a point set to <= 2 synthetic points P' such that for every line L,
// SE(L, P) = SE(L, P') + constant, with the synthetic x-values contained in the
// x-range of the input. The construction works in a frame translated to the
// centroid and skewed so the best-fit line is y = 0; in that frame the
// synthetic points sit at
//   x1 = -stddev * sqrt(-min(X) / max(X)),  w1 = sum(W) * max(X) / (max(X) - min(X)),
//   x2 =  stddev * sqrt(max(X) / -min(X)),  w2 = sum(W) * -min(X) / (max(X) - min(X)),
// with y = 0, and are mapped back by undoing the skew and translation.
inline CondensedSet linear_condense(const PointSet& pts) {
  CondensedSet out;
  if (pts.empty()) return out;

  const detail::Moments m = detail::weighted_means(pts);
  const double cx_min = m.x_min - m.mean_x;
  const double cx_max = m.x_max - m.mean_x;

  // All x equal (or centroid pinned to an extreme by rounding): the centroid
  // alone carries the line-independent information.
  if (detail::x_spread_degenerate(m.x_min, m.x_max) || !(cx_min < 0.0) || !(cx_max > 0.0)) {
    for (const WeightedPoint& p : pts) {
      const double r = p.y - m.mean_y;
      out.constant += p.weight * r * r;
    }
    out.points.push_back({m.mean_x, m.mean_y, m.sum_w});
    return out;
  }

  double sxx = 0.0, sxy = 0.0;
  for (const WeightedPoint& p : pts) {
    const double dx = p.x - m.mean_x;
    sxx += p.weight * dx * dx;
    sxy += p.weight * dx * (p.y - m.mean_y);
  }
  const double slope = sxy / sxx;

  // Residual energy around the best-fit line, i.e. SE(best_fit_line(P), P).
  for (const WeightedPoint& p : pts) {
    const double r = (p.y - m.mean_y) - slope * (p.x - m.mean_x);
    out.constant += p.weight * r * r;
  }

  const double stddev = std::sqrt(sxx / m.sum_w);
  const double x1 = -stddev * std::sqrt(-cx_min / cx_max);
  const double x2 = stddev * std::sqrt(cx_max / -cx_min);
  const double w1 = m.sum_w * cx_max / (cx_max - cx_min);
  const double w2 = m.sum_w * -cx_min / (cx_max - cx_min);

  // Undo the skew (y' = slope * x') and the translation. The clamp only
  // absorbs last-ulp rounding; the construction already keeps the x-values
  // inside the input range.
  out.points.push_back(
      {std::clamp(x1 + m.mean_x, m.x_min, m.x_max), slope * x1 + m.mean_y, w1});
  out.points.push_back(
      {std::clamp(x2 + m.mean_x, m.x_min, m.x_max), slope * x2 + m.mean_y, w2});
  return out;
}

// Clamps x-values to the knot range, partitions by adjacent knot pairs
// (half-open intervals, last one closed), and condenses each partition
// separately. For any piecewise-linear curve whose x-knots are a subset of
// `knots`, SE(curve, pts) = SE(curve, result.points) + result.constant.
inline CondensedSet condense_around_knots(const PointSet& pts, const std::vector<double>& knots) {
  if (knots.size() < 2) {
    throw std::invalid_argument("condense_around_knots requires at least 2 knots");
  }
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    if (!(knots[i] < knots[i + 1])) {
      throw std::invalid_argument("condense_around_knots requires strictly increasing knots");
    }
  }

  CondensedSet out;
  if (pts.empty()) return out;

  const std::size_t num_parts = knots.size() - 1;
  std::vector<PointSet> parts(num_parts);
  for (PointSet& part : parts) part.reserve(pts.size() / num_parts + 1);

  for (const WeightedPoint& p : pts) {
    const double x = std::clamp(p.x, knots.front(), knots.back());
    auto it = std::upper_bound(knots.begin(), knots.end(), x);
    std::size_t idx = static_cast<std::size_t>(it - knots.begin());
    idx = idx == 0 ? 0 : idx - 1;            // knots[idx] <= x
    if (idx >= num_parts) idx = num_parts - 1;  // x == knots.back()
    parts[idx].push_back({x, p.y, p.weight});
  }

  out.points.reserve(2 * num_parts);
  for (const PointSet& part : parts) {
    CondensedSet c = linear_condense(part);
    out.points.insert(out.points.end(), c.points.begin(), c.points.end());
    out.constant += c.constant;
  }
  return out;
}

}  // namespace pwl
