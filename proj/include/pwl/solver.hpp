#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "pwl/error.hpp"
#include "pwl/point.hpp"
#include "pwl/transform.hpp"

namespace pwl {

// Box bounds on segment slopes; infinities disable a side.
struct SlopeBounds {
  double min_slope = -std::numeric_limits<double>::infinity();
  double max_slope = std::numeric_limits<double>::infinity();

  bool active() const { return std::isfinite(min_slope) || std::isfinite(max_slope); }
};

inline void validate(const SlopeBounds& bounds) {
  if (!(bounds.min_slope <= bounds.max_slope)) {
    throw std::invalid_argument("invalid slope bounds: min_slope > max_slope");
  }
}

enum class MonoDirection { kIncreasing, kDecreasing };

namespace detail {

// In-place Cholesky solve of the symmetric system a * x = rhs (a row-major,
// n x n, lower triangle used). Returns false if a pivot is not safely positive.
inline bool cholesky_solve(std::vector<double>& a, std::vector<double>& rhs, std::size_t n) {
  double diag_scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) diag_scale = std::max(diag_scale, std::abs(a[i * n + i]));
  const double pivot_floor = diag_scale * n * 1e-14;

  for (std::size_t j = 0; j < n; ++j) {
    double d = a[j * n + j];
    for (std::size_t k = 0; k < j; ++k) d -= a[j * n + k] * a[j * n + k];
    if (!(d > pivot_floor) || !std::isfinite(d)) return false;
    const double ljj = std::sqrt(d);
    a[j * n + j] = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double v = a[i * n + j];
      for (std::size_t k = 0; k < j; ++k) v -= a[i * n + k] * a[j * n + k];
      a[i * n + j] = v / ljj;
    }
  }
  // Forward then backward substitution.
  for (std::size_t i = 0; i < n; ++i) {
    double v = rhs[i];
    for (std::size_t k = 0; k < i; ++k) v -= a[i * n + k] * rhs[k];
    rhs[i] = v / a[i * n + i];
  }
  for (std::size_t i = n; i-- > 0;) {
    double v = rhs[i];
    for (std::size_t k = i + 1; k < n; ++k) v -= a[k * n + i] * rhs[k];
    rhs[i] = v / a[i * n + i];
  }
  return true;
}

// Solves the normal equations gram * x = rhs. Tries a plain Cholesky first;
// rank-deficient systems (e.g. a knot interval with no data) fall back to a
// small trace-scaled ridge so fitting never aborts.
inline std::vector<double> solve_normal_equations(std::vector<double> gram,
                                                  std::vector<double> rhs, std::size_t n) {
  double trace = 0.0;
  for (std::size_t i = 0; i < n; ++i) trace += gram[i * n + i];
  if (!(trace > 0.0)) return std::vector<double>(n, 0.0);

  std::vector<double> a = gram;
  std::vector<double> x = rhs;
  if (cholesky_solve(a, x, n)) return x;

  double ridge = 1e-9 * trace / static_cast<double>(n);
  for (int attempt = 0; attempt < 8; ++attempt) {
    a = gram;
    x = rhs;
    for (std::size_t i = 0; i < n; ++i) a[i * n + i] += ridge;
    if (cholesky_solve(a, x, n)) return x;
    ridge *= 1000.0;
  }
  return std::vector<double>(n, 0.0);
}

// Hat-basis weights of a piecewise-linear curve with knot positions `t` at
// input value v: the two bracketing knots share the point linearly; values
// outside the knot range clamp onto the boundary knot.
struct HatWeight {
  std::size_t i0 = 0;
  std::size_t i1 = 0;
  double w0 = 1.0;
  double w1 = 0.0;
};

inline HatWeight hat_weight(const std::vector<double>& t, double v) {
  const std::size_t k = t.size();
  if (k == 1 || v <= t.front()) return {0, 0, 1.0, 0.0};
  if (v >= t.back()) return {k - 1, k - 1, 1.0, 0.0};
  auto it = std::upper_bound(t.begin(), t.end(), v);
  const std::size_t hi = static_cast<std::size_t>(it - t.begin());
  const std::size_t lo = hi - 1;
  const double u = (v - t[lo]) / (t[hi] - t[lo]);
  return {lo, hi, 1.0 - u, u};
}

// Weighted least squares for the y-values at fixed knot positions `t`
// (already transformed); point x-values in `pts` must be in the same space.
inline std::vector<double> solve_hat_least_squares(const PointSet& pts,
                                                   const std::vector<double>& t) {
  const std::size_t n = t.size();
  std::vector<double> gram(n * n, 0.0);
  std::vector<double> rhs(n, 0.0);
  for (const WeightedPoint& p : pts) {
    const HatWeight h = hat_weight(t, p.x);
    gram[h.i0 * n + h.i0] += p.weight * h.w0 * h.w0;
    rhs[h.i0] += p.weight * h.w0 * p.y;
    if (h.i1 != h.i0) {
      gram[h.i1 * n + h.i1] += p.weight * h.w1 * h.w1;
      gram[h.i1 * n + h.i0] += p.weight * h.w0 * h.w1;
      gram[h.i0 * n + h.i1] += p.weight * h.w0 * h.w1;
      rhs[h.i1] += p.weight * h.w1 * p.y;
    }
  }
  return solve_normal_equations(std::move(gram), std::move(rhs), n);
}

inline double hat_squared_error(const PointSet& pts, const std::vector<double>& t,
                                const std::vector<double>& y) {
  double se = 0.0;
  for (const WeightedPoint& p : pts) {
    const HatWeight h = hat_weight(t, p.x);
    const double r = h.w0 * y[h.i0] + h.w1 * y[h.i1] - p.y;
    se += p.weight * r * r;
  }
  return se;
}

// Bounded-variable least squares via an active-set loop (Lawson-Hanson style):
// solve the free subsystem, walk back to feasibility when the step leaves the
// box, and free the worst KKT violator among bound variables until stationary.
class BvlsSolver {
 public:
  BvlsSolver(std::vector<double> gram, std::vector<double> rhs, std::vector<double> lo,
             std::vector<double> hi)
      : gram_(std::move(gram)), rhs_(std::move(rhs)), lo_(std::move(lo)), hi_(std::move(hi)),
        n_(rhs_.size()) {}

  std::vector<double> solve() {
    enum State { kFree, kAtLo, kAtHi };
    std::vector<State> state(n_, kFree);
    std::vector<double> z(n_);
    for (std::size_t i = 0; i < n_; ++i) z[i] = std::clamp(0.0, lo_[i], hi_[i]);

    double rhs_scale = 0.0;
    for (double v : rhs_) rhs_scale = std::max(rhs_scale, std::abs(v));
    const double kkt_tol = 1e-10 * (1.0 + rhs_scale);

    const std::size_t max_iter = 10 * n_ + 10;
    for (std::size_t iter = 0; iter < max_iter; ++iter) {
      // Solve for the free variables with bound variables held fixed.
      std::vector<std::size_t> free_idx;
      for (std::size_t i = 0; i < n_; ++i) {
        if (state[i] == kFree) free_idx.push_back(i);
      }
      std::vector<double> z_new = z;
      if (!free_idx.empty()) {
        const std::size_t f = free_idx.size();
        std::vector<double> g(f * f);
        std::vector<double> r(f);
        for (std::size_t a = 0; a < f; ++a) {
          double v = rhs_[free_idx[a]];
          for (std::size_t i = 0; i < n_; ++i) {
            if (state[i] != kFree) v -= gram_[free_idx[a] * n_ + i] * z[i];
          }
          r[a] = v;
          for (std::size_t b = 0; b < f; ++b) {
            g[a * f + b] = gram_[free_idx[a] * n_ + free_idx[b]];
          }
        }
        const std::vector<double> sol = solve_normal_equations(std::move(g), std::move(r), f);
        for (std::size_t a = 0; a < f; ++a) z_new[free_idx[a]] = sol[a];
      }

      // Longest feasible step toward the subproblem solution.
      double alpha = 1.0;
      std::size_t blocker = n_;
      State blocker_state = kFree;
      for (std::size_t i : free_idx) {
        if (z_new[i] < lo_[i]) {
          const double a = (lo_[i] - z[i]) / (z_new[i] - z[i]);
          if (a < alpha) { alpha = a; blocker = i; blocker_state = kAtLo; }
        } else if (z_new[i] > hi_[i]) {
          const double a = (hi_[i] - z[i]) / (z_new[i] - z[i]);
          if (a < alpha) { alpha = a; blocker = i; blocker_state = kAtHi; }
        }
      }

      if (blocker != n_) {
        for (std::size_t i = 0; i < n_; ++i) z[i] += alpha * (z_new[i] - z[i]);
        z[blocker] = blocker_state == kAtLo ? lo_[blocker] : hi_[blocker];
        state[blocker] = blocker_state;
        // Snap any other free variable that the step left on its bound.
        for (std::size_t i : free_idx) {
          if (state[i] != kFree) continue;
          if (z[i] <= lo_[i]) { z[i] = lo_[i]; state[i] = kAtLo; }
          if (z[i] >= hi_[i]) { z[i] = hi_[i]; state[i] = kAtHi; }
        }
        continue;
      }

      z = z_new;
      // KKT check on bound variables: gradient must not point into the box.
      double worst = 0.0;
      std::size_t worst_idx = n_;
      for (std::size_t i = 0; i < n_; ++i) {
        if (state[i] == kFree) continue;
        double grad = -rhs_[i];
        for (std::size_t j = 0; j < n_; ++j) grad += gram_[i * n_ + j] * z[j];
        const double violation = state[i] == kAtLo ? -grad : grad;
        if (violation > worst) { worst = violation; worst_idx = i; }
      }
      if (worst_idx == n_ || worst <= kkt_tol) break;
      state[worst_idx] = kFree;
    }

    for (std::size_t i = 0; i < n_; ++i) z[i] = std::clamp(z[i], lo_[i], hi_[i]);
    return z;
  }

 private:
  std::vector<double> gram_;
  std::vector<double> rhs_;
  std::vector<double> lo_;
  std::vector<double> hi_;
  std::size_t n_;
};

// Clamp to the knot range first, transform after; this mirrors curve
// evaluation so out-of-range points never hit the transform's domain.
inline PointSet transform_points_for_knots(const PointSet& pts, const std::vector<double>& x_knots,
                                           Transform fx) {
  PointSet out;
  out.reserve(pts.size());
  const double x_lo = x_knots.front();
  const double x_hi = x_knots.back();
  for (const WeightedPoint& p : pts) {
    out.push_back({apply_transform(fx, std::clamp(p.x, x_lo, x_hi)), p.y, p.weight});
  }
  return out;
}

inline std::vector<double> transform_knots(const std::vector<double>& x_knots, Transform fx) {
  if (x_knots.empty()) throw std::invalid_argument("at least one x-knot required");
  std::vector<double> t;
  t.reserve(x_knots.size());
  for (double x : x_knots) t.push_back(apply_transform(fx, x));
  for (std::size_t i = 0; i + 1 < t.size(); ++i) {
    if (!(t[i] < t[i + 1])) {
      throw std::invalid_argument("x-knots must be strictly increasing in transformed space");
    }
  }
  return t;
}

}  // namespace detail

// Optimal y-knots for fixed x-knots: weighted least squares over the hat
// basis induced by the knots in fx-transformed space. A single knot yields
// the weighted mean.
inline std::vector<double> solve_y_knots(const PointSet& pts, const std::vector<double>& x_knots,
                                         Transform fx = Transform::kIdentity) {
  if (pts.empty()) throw InsufficientDataError("solve_y_knots requires at least one point");
  const std::vector<double> t = detail::transform_knots(x_knots, fx);
  const PointSet work = detail::transform_points_for_knots(pts, x_knots, fx);
  return detail::solve_hat_least_squares(work, t);
}

// Same problem reparameterized as (y_0, deltas) with each delta bounded by
// slope * knot spacing in transformed coordinates.
inline std::vector<double> solve_y_knots_bounded(const PointSet& pts,
                                                 const std::vector<double>& x_knots, Transform fx,
                                                 const SlopeBounds& bounds) {
  validate(bounds);
  if (!bounds.active()) return solve_y_knots(pts, x_knots, fx);
  if (pts.empty()) throw InsufficientDataError("solve_y_knots_bounded requires at least one point");

  const std::vector<double> t = detail::transform_knots(x_knots, fx);
  const PointSet work = detail::transform_points_for_knots(pts, x_knots, fx);
  const std::size_t k = t.size();
  if (k == 1) return detail::solve_hat_least_squares(work, t);

  // Columns: intercept y_0, then one delta per segment. A point whose hat
  // weights are (w0 at i0, w1 at i1 = i0+1) has coefficient 1 on every delta
  // up to i0 and w1 on delta i1.
  const std::size_t n = k;  // 1 intercept + (k-1) deltas
  std::vector<double> gram(n * n, 0.0);
  std::vector<double> rhs(n, 0.0);
  std::vector<double> row(n, 0.0);
  for (const WeightedPoint& p : work) {
    const detail::HatWeight h = detail::hat_weight(t, p.x);
    std::fill(row.begin(), row.end(), 0.0);
    row[0] = 1.0;
    for (std::size_t j = 1; j <= h.i0; ++j) row[j] = 1.0;
    if (h.i1 != h.i0) row[h.i1] = h.w1;
    for (std::size_t a = 0; a < n; ++a) {
      if (row[a] == 0.0) continue;
      rhs[a] += p.weight * row[a] * p.y;
      for (std::size_t b = 0; b <= a; ++b) {
        if (row[b] == 0.0) continue;
        gram[a * n + b] += p.weight * row[a] * row[b];
      }
    }
  }
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) gram[a * n + b] = gram[b * n + a];
  }

  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> lo(n, -inf), hi(n, inf);
  for (std::size_t j = 1; j < n; ++j) {
    const double dt = t[j] - t[j - 1];
    lo[j] = std::isfinite(bounds.min_slope) ? bounds.min_slope * dt : -inf;
    hi[j] = std::isfinite(bounds.max_slope) ? bounds.max_slope * dt : inf;
  }

  detail::BvlsSolver bvls(std::move(gram), std::move(rhs), std::move(lo), std::move(hi));
  const std::vector<double> z = bvls.solve();

  std::vector<double> y(k);
  y[0] = z[0];
  for (std::size_t j = 1; j < k; ++j) y[j] = y[j - 1] + z[j];
  return y;
}

// Weighted isotonic regression (pool-adjacent-violators); returns the minimal
// squared error among monotone functions of the given direction. Points with
// equal x are merged first since a function must be single-valued there.
inline double isotonic_fit(const PointSet& pts, MonoDirection direction) {
  if (pts.empty()) throw InsufficientDataError("isotonic_fit requires at least one point");

  PointSet sorted = pts;
  sort_by_x(sorted);
  const double sign = direction == MonoDirection::kIncreasing ? 1.0 : -1.0;

  // Per distinct x: weighted mean (in sign-adjusted y) and irreducible
  // within-group error.
  struct Group {
    double mean;
    double weight;
  };
  std::vector<Group> groups;
  double base_se = 0.0;
  std::size_t i = 0;
  while (i < sorted.size()) {
    std::size_t j = i;
    double w = 0.0, wy = 0.0;
    while (j < sorted.size() && sorted[j].x == sorted[i].x) {
      w += sorted[j].weight;
      wy += sorted[j].weight * sign * sorted[j].y;
      ++j;
    }
    const double mean = wy / w;
    for (std::size_t q = i; q < j; ++q) {
      const double r = sign * sorted[q].y - mean;
      base_se += sorted[q].weight * r * r;
    }
    groups.push_back({mean, w});
    i = j;
  }

  // PAV: merge adjacent blocks while they violate the non-decreasing order.
  struct Block {
    double value;
    double weight;
  };
  std::vector<Block> blocks;
  std::vector<std::size_t> block_size;
  blocks.reserve(groups.size());
  for (const Group& g : groups) {
    blocks.push_back({g.mean, g.weight});
    block_size.push_back(1);
    while (blocks.size() > 1 && blocks[blocks.size() - 2].value > blocks.back().value) {
      const Block last = blocks.back();
      blocks.pop_back();
      Block& prev = blocks.back();
      prev.value = (prev.value * prev.weight + last.value * last.weight) /
                   (prev.weight + last.weight);
      prev.weight += last.weight;
      block_size[block_size.size() - 2] += block_size.back();
      block_size.pop_back();
    }
  }

  double se = base_se;
  std::size_t g = 0;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    for (std::size_t q = 0; q < block_size[b]; ++q, ++g) {
      const double r = blocks[b].value - groups[g].mean;
      se += groups[g].weight * r * r;
    }
  }
  return se;
}

// Fits both isotonic directions and keeps the lower-error one; ties go to
// increasing for determinism.
inline MonoDirection infer_mono_direction(const PointSet& pts) {
  PointSet sorted = pts;
  sort_by_x(sorted);
  if (count_distinct_x(sorted) < 2) {
    throw InsufficientDataError("infer_mono_direction requires at least 2 distinct x-values");
  }
  const double inc = isotonic_fit(pts, MonoDirection::kIncreasing);
  const double dec = isotonic_fit(pts, MonoDirection::kDecreasing);
  return inc <= dec ? MonoDirection::kIncreasing : MonoDirection::kDecreasing;
}

// Weighted Pearson correlation; 0 by convention when either variance
// vanishes relative to the variable's own scale.
inline double weighted_pearson(std::span<const double> xs, std::span<const double> ys,
                               std::span<const double> ws) {
  if (xs.size() != ys.size() || xs.size() != ws.size()) {
    throw std::invalid_argument("weighted_pearson requires equal-length inputs");
  }
  const std::size_t n = xs.size();
  if (n < 2) return 0.0;

  double sw = 0.0, sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sw += ws[i];
    sx += ws[i] * xs[i];
    sy += ws[i] * ys[i];
  }
  const double mx = sx / sw;
  const double my = sy / sw;
  double vxx = 0.0, vyy = 0.0, vxy = 0.0, mxx = 0.0, myy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    vxx += ws[i] * dx * dx;
    vyy += ws[i] * dy * dy;
    vxy += ws[i] * dx * dy;
    mxx += ws[i] * xs[i] * xs[i];
    myy += ws[i] * ys[i] * ys[i];
  }
  if (vxx <= 1e-12 * mxx || vyy <= 1e-12 * myy) return 0.0;
  return std::clamp(vxy / std::sqrt(vxx * vyy), -1.0, 1.0);
}

inline double weighted_pearson(const std::vector<double>& xs, const std::vector<double>& ys,
                               const std::vector<double>& ws) {
  return weighted_pearson(std::span<const double>(xs), std::span<const double>(ys),
                          std::span<const double>(ws));
}

}  // namespace pwl
