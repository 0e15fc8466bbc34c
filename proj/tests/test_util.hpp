#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "pwl/point.hpp"

namespace testutil {

inline std::mt19937_64 make_rng(std::uint64_t seed) { return std::mt19937_64(seed); }

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline pwl::PointSet random_points(std::mt19937_64& rng, std::size_t n, double x_lo, double x_hi,
                                   double y_lo = -1.0, double y_hi = 1.0) {
  pwl::PointSet pts;
  pts.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    pts.push_back({uniform(rng, x_lo, x_hi), uniform(rng, y_lo, y_hi), uniform(rng, 0.1, 3.0)});
  }
  return pts;
}

// Sorted, strictly increasing values with a minimum spacing.
inline std::vector<double> random_sorted_distinct(std::mt19937_64& rng, std::size_t k, double lo,
                                                  double hi, double min_gap) {
  std::vector<double> xs;
  while (xs.size() < k) {
    const double x = uniform(rng, lo, hi);
    bool ok = true;
    for (double v : xs) {
      if (std::abs(v - x) < min_gap) {
        ok = false;
        break;
      }
    }
    if (ok) xs.push_back(x);
  }
  std::sort(xs.begin(), xs.end());
  return xs;
}

}  // namespace testutil
