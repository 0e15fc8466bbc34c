#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace pwl {

// One weighted sample (x, y, weight) of a univariate function.
struct WeightedPoint {
  double x = 0.0;
  double y = 0.0;
  double weight = 1.0;
};

using PointSet = std::vector<WeightedPoint>;

inline bool is_sorted_by_x(const PointSet& pts) {
  return std::is_sorted(pts.begin(), pts.end(),
                        [](const WeightedPoint& a, const WeightedPoint& b) { return a.x < b.x; });
}

// Stable so that points with equal x keep their input order.
inline void sort_by_x(PointSet& pts) {
  std::stable_sort(pts.begin(), pts.end(),
                   [](const WeightedPoint& a, const WeightedPoint& b) { return a.x < b.x; });
}

inline double total_weight(const PointSet& pts) {
  double sum = 0.0;
  for (const WeightedPoint& p : pts) sum += p.weight;
  return sum;
}

// Requires finite coordinates and strictly positive weights.
inline void validate_points(const PointSet& pts) {
  for (const WeightedPoint& p : pts) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      throw std::invalid_argument("point coordinates must be finite");
    }
    if (!(p.weight > 0.0) || !std::isfinite(p.weight)) {
      throw std::invalid_argument("point weights must be positive and finite");
    }
  }
}

inline std::size_t count_distinct_x(const PointSet& sorted_pts) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < sorted_pts.size(); ++i) {
    if (i == 0 || sorted_pts[i].x != sorted_pts[i - 1].x) ++n;
  }
  return n;
}

}  // namespace pwl
