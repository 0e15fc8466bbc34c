#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pwl/condense.hpp"
#include "pwl/curve.hpp"
#include "pwl/error.hpp"
#include "pwl/point.hpp"
#include "pwl/solver.hpp"
#include "pwl/transform.hpp"

namespace pwl {

enum class MonoPolicy { kAuto, kNone, kIncreasing, kDecreasing };

// Knobs for fit_pwl. In practice only num_segments and mono matter; the rest
// are sized so the defaults behave well on anything from a handful of points
// to millions.
struct FitConfig {
  int num_segments = 5;
  MonoPolicy mono = MonoPolicy::kAuto;
  int num_samples = 100;
  std::size_t downsample_to = 1'000'000;
  int max_refine_iterations = 10;
  std::optional<Transform> fx;  // empty -> pick automatically from the data
  SlopeBounds slope;
  std::uint64_t seed = 0;
};

inline void validate(const FitConfig& config) {
  if (config.num_segments < 1) {
    throw std::invalid_argument("num_segments must be >= 1");
  }
  if (config.num_samples < config.num_segments + 1) {
    throw std::invalid_argument("num_samples must be >= num_segments + 1");
  }
  if (config.downsample_to < static_cast<std::size_t>(config.num_samples)) {
    throw std::invalid_argument("downsample_to must be >= num_samples");
  }
  if (config.max_refine_iterations < 0) {
    throw std::invalid_argument("max_refine_iterations must be >= 0");
  }
  validate(config.slope);
}

// Distinct x-values the knot search is allowed to place knots at.
struct CandidateKnots {
  std::vector<double> xs;
};

inline void validate(const CandidateKnots& candidates) {
  if (candidates.xs.size() < 2) {
    throw std::invalid_argument("candidate knots require at least 2 values");
  }
  for (std::size_t i = 0; i + 1 < candidates.xs.size(); ++i) {
    if (!(candidates.xs[i] < candidates.xs[i + 1])) {
      throw std::invalid_argument("candidate knots must be strictly increasing");
    }
  }
}

// Uniform random subset of at most max_n points (selection sampling, so the
// result preserves input order and is fully determined by the seed).
inline PointSet downsample(const PointSet& pts, std::size_t max_n, std::uint64_t seed) {
  if (max_n < 1) throw std::invalid_argument("downsample requires max_n >= 1");
  if (pts.size() <= max_n) return pts;
  std::mt19937_64 rng(seed);
  PointSet out;
  out.reserve(max_n);
  std::size_t need = max_n;
  std::size_t left = pts.size();
  for (const WeightedPoint& p : pts) {
    if (rng() % left < need) {
      out.push_back(p);
      if (--need == 0) break;
    }
    --left;
  }
  return out;
}

namespace detail {

inline std::vector<double> quantile_candidates(const PointSet& sorted,
                                               const std::vector<double>& cum_weight, int rate) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(rate));
  const double total = cum_weight.back();
  out.push_back(sorted.front().x);
  for (int k = 1; k + 1 < rate; ++k) {
    const double target = total * (static_cast<double>(k) / static_cast<double>(rate - 1));
    auto it = std::lower_bound(cum_weight.begin(), cum_weight.end(), target);
    out.push_back(sorted[static_cast<std::size_t>(it - cum_weight.begin())].x);
  }
  out.push_back(sorted.back().x);
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

inline CandidateKnots sample_candidate_knots_sorted(const PointSet& sorted, int num_samples) {
  if (num_samples < 2) throw std::invalid_argument("num_samples must be >= 2");
  const std::size_t distinct = count_distinct_x(sorted);
  if (distinct < 2) {
    throw InsufficientDataError("candidate sampling requires >= 2 distinct x-values");
  }

  std::vector<double> cum_weight;
  cum_weight.reserve(sorted.size());
  double running = 0.0;
  for (const WeightedPoint& p : sorted) {
    running += p.weight;
    cum_weight.push_back(running);
  }

  // Sample by cumulative weight; if repeated x-values produce duplicates,
  // resample at doubled rates until enough distinct candidates accumulate
  // (capped at 6 doublings) without ever exceeding num_samples results.
  int rate = num_samples;
  std::vector<double> xs = quantile_candidates(sorted, cum_weight, rate);
  for (int pass = 0; pass < 6; ++pass) {
    if (xs.size() >= static_cast<std::size_t>(num_samples) || xs.size() >= distinct) break;
    rate = 2 * rate - 1;
    xs = quantile_candidates(sorted, cum_weight, rate);
  }

  if (xs.size() > static_cast<std::size_t>(num_samples)) {
    std::vector<double> trimmed;
    trimmed.reserve(static_cast<std::size_t>(num_samples));
    const double span = static_cast<double>(xs.size() - 1);
    for (int k = 0; k < num_samples; ++k) {
      const auto idx = static_cast<std::size_t>(
          std::llround(span * (static_cast<double>(k) / static_cast<double>(num_samples - 1))));
      trimmed.push_back(xs[idx]);
    }
    trimmed.erase(std::unique(trimmed.begin(), trimmed.end()), trimmed.end());
    xs = std::move(trimmed);
  }
  return CandidateKnots{std::move(xs)};
}

}  // namespace detail

// x-values spaced equally by cumulative weight, deduplicated.
inline CandidateKnots sample_candidate_knots(const PointSet& pts, int num_samples) {
  PointSet sorted = pts;
  sort_by_x(sorted);
  return detail::sample_candidate_knots_sorted(sorted, num_samples);
}

// Picks log / log1p / symlog1p from the x-range, and keeps it only when it
// improves the absolute weighted correlation with y by more than min_gain
// over the identity transform.
inline Transform select_transform(const PointSet& pts, double min_gain = 0.05) {
  if (pts.size() < 2) return Transform::kIdentity;
  double min_x = pts.front().x;
  for (const WeightedPoint& p : pts) min_x = std::min(min_x, p.x);
  const Transform candidate = min_x > 0.0   ? Transform::kLog
                              : min_x >= 0.0 ? Transform::kLog1p
                                             : Transform::kSymlog1p;
  std::vector<double> xs, txs, ys, ws;
  xs.reserve(pts.size());
  txs.reserve(pts.size());
  ys.reserve(pts.size());
  ws.reserve(pts.size());
  for (const WeightedPoint& p : pts) {
    xs.push_back(p.x);
    txs.push_back(apply_transform(candidate, p.x));
    ys.push_back(p.y);
    ws.push_back(p.weight);
  }
  const double r_identity = std::abs(weighted_pearson(xs, ys, ws));
  const double r_transformed = std::abs(weighted_pearson(txs, ys, ws));
  return r_transformed - r_identity > min_gain ? candidate : Transform::kIdentity;
}

struct FitDiagnostics {
  std::vector<double> se_trace;  // condensed SE after each accepted greedy step
  int refine_cycles = 0;
  bool segments_reduced = false;
  double condensed_se = 0.0;      // final curve's SE on the condensed points
  double condense_constant = 0.0;  // add to condensed_se to get full-data SE
};

struct GreedyResult {
  std::vector<double> x_knots;
  std::vector<double> y_knots;
  FitDiagnostics diag;
};

namespace detail {

struct CoreResult {
  std::vector<std::size_t> sel;  // indices into the candidate array, ascending
  std::vector<double> y;
  FitDiagnostics diag;
};

inline SlopeBounds resolve_bounds(const FitConfig& config, const PointSet& cond_points) {
  MonoPolicy mono = config.mono;
  if (mono == MonoPolicy::kAuto) {
    PointSet sorted = cond_points;
    sort_by_x(sorted);
    if (count_distinct_x(sorted) < 2) {
      mono = MonoPolicy::kIncreasing;
    } else {
      mono = infer_mono_direction(cond_points) == MonoDirection::kIncreasing
                 ? MonoPolicy::kIncreasing
                 : MonoPolicy::kDecreasing;
    }
  }
  SlopeBounds bounds = config.slope;
  if (mono == MonoPolicy::kIncreasing) bounds.min_slope = std::max(bounds.min_slope, 0.0);
  if (mono == MonoPolicy::kDecreasing) bounds.max_slope = std::min(bounds.max_slope, 0.0);
  validate(bounds);
  return bounds;
}

// Two-stage greedy knot search over the condensed points. Stage 1 grows the
// knot set one candidate at a time, always taking the candidate whose solve
// yields the lowest squared error. Stage 2 cycles through the solution,
// re-choosing each knot against all remaining candidates, until a full cycle
// changes nothing or the iteration cap is reached. Candidate evaluation uses
// the unbounded solver; slope bounds apply to the final solve.
inline CoreResult greedy_core(const PointSet& cond_pts, double condense_constant,
                              const std::vector<double>& t_cand, const FitConfig& config) {
  const std::size_t num_cand = t_cand.size();
  const std::size_t target =
      std::min<std::size_t>(static_cast<std::size_t>(config.num_segments) + 1, num_cand);

  CoreResult res;
  res.diag.condense_constant = condense_constant;
  res.diag.segments_reduced =
      target < static_cast<std::size_t>(config.num_segments) + 1;

  const SlopeBounds bounds = resolve_bounds(config, cond_pts);

  std::vector<char> in_sel(num_cand, 0);
  std::vector<std::size_t> sel{0};  // deterministic start: the lowest-x candidate
  in_sel[0] = 1;

  std::vector<double> t_sel{t_cand[0]};
  auto rebuild_t_sel = [&] {
    t_sel.clear();
    for (std::size_t idx : sel) t_sel.push_back(t_cand[idx]);
  };

  std::vector<double> scratch_t;
  auto eval_subset = [&](const std::vector<double>& t) {
    const std::vector<double> y = solve_hat_least_squares(cond_pts, t);
    return hat_squared_error(cond_pts, t, y);
  };
  auto eval_with = [&](const std::vector<std::size_t>& base, std::size_t skip_pos,
                       std::size_t extra) {
    scratch_t.clear();
    const double t_extra = t_cand[extra];
    bool inserted = false;
    for (std::size_t pos = 0; pos < base.size(); ++pos) {
      if (pos == skip_pos) continue;
      const double t = t_cand[base[pos]];
      if (!inserted && t_extra < t) {
        scratch_t.push_back(t_extra);
        inserted = true;
      }
      scratch_t.push_back(t);
    }
    if (!inserted) scratch_t.push_back(t_extra);
    return eval_subset(scratch_t);
  };

  double se_cur = eval_subset(t_sel);
  res.diag.se_trace.push_back(se_cur);

  // Stage 1: grow.
  while (sel.size() < target) {
    double best_se = std::numeric_limits<double>::infinity();
    std::size_t best_j = num_cand;
    for (std::size_t j = 0; j < num_cand; ++j) {
      if (in_sel[j]) continue;
      const double se = eval_with(sel, sel.size(), j);
      if (se < best_se) {
        best_se = se;
        best_j = j;
      }
    }
    in_sel[best_j] = 1;
    sel.insert(std::upper_bound(sel.begin(), sel.end(), best_j), best_j);
    se_cur = best_se;
    res.diag.se_trace.push_back(se_cur);
  }

  // Stage 2: refine.
  int cycles = 0;
  for (int cycle = 0; cycle < config.max_refine_iterations; ++cycle) {
    bool changed = false;
    for (std::size_t pos = 0; pos < sel.size(); ++pos) {
      const std::size_t removed = sel[pos];
      double best_se = se_cur;  // keeping the removed knot is the incumbent
      std::size_t best_j = removed;
      for (std::size_t j = 0; j < num_cand; ++j) {
        if (in_sel[j]) continue;
        const double se = eval_with(sel, pos, j);
        if (se < best_se) {
          best_se = se;
          best_j = j;
        }
      }
      if (best_j != removed) {
        in_sel[removed] = 0;
        in_sel[best_j] = 1;
        sel.erase(sel.begin() + static_cast<std::ptrdiff_t>(pos));
        sel.insert(std::upper_bound(sel.begin(), sel.end(), best_j), best_j);
        se_cur = best_se;
        res.diag.se_trace.push_back(se_cur);
        changed = true;
      }
    }
    ++cycles;
    if (!changed) break;
  }
  res.diag.refine_cycles = cycles;

  rebuild_t_sel();
  if (bounds.active()) {
    res.y = solve_y_knots_bounded(cond_pts, t_sel, Transform::kIdentity, bounds);
  } else {
    res.y = solve_hat_least_squares(cond_pts, t_sel);
  }
  res.diag.condensed_se = hat_squared_error(cond_pts, t_sel, res.y);
  res.sel = std::move(sel);
  return res;
}

}  // namespace detail

// Greedy knot selection among the given candidates; returns the chosen
// x-knots with their least-squares y-values. Condensation happens internally,
// so the cost per candidate evaluation is O(|candidates|), not O(|pts|).
inline GreedyResult greedy_fit(const PointSet& pts, const CandidateKnots& candidates,
                               const FitConfig& config) {
  validate(config);
  validate(candidates);
  if (pts.empty()) throw InsufficientDataError("greedy_fit requires at least one point");
  const CondensedSet cond = condense_around_knots(pts, candidates.xs);
  detail::CoreResult core =
      detail::greedy_core(cond.points, cond.constant, candidates.xs, config);
  GreedyResult out;
  out.diag = std::move(core.diag);
  out.x_knots.reserve(core.sel.size());
  for (std::size_t idx : core.sel) out.x_knots.push_back(candidates.xs[idx]);
  out.y_knots = std::move(core.y);
  return out;
}

struct FitResult {
  PWLCurve curve;
  FitDiagnostics diag;
};

// The full pipeline: downsample, sample candidate knots by cumulative weight,
// pick an x-transform, condense, run the greedy knot search, and return a
// curve in original x-space. Pure given the seed.
inline FitResult fit_pwl_result(const PointSet& pts, const FitConfig& config = {},
                                std::string name = "curve") {
  validate(config);
  validate_points(pts);

  PointSet data = downsample(pts, config.downsample_to, config.seed);
  sort_by_x(data);
  if (count_distinct_x(data) < 2) {
    throw InsufficientDataError("fit_pwl requires at least 2 distinct x-values");
  }

  const CandidateKnots candidates =
      detail::sample_candidate_knots_sorted(data, config.num_samples);
  const Transform fx = config.fx ? *config.fx : select_transform(data);

  std::vector<double> t_cand;
  t_cand.reserve(candidates.xs.size());
  for (double x : candidates.xs) t_cand.push_back(apply_transform(fx, x));

  PointSet work;
  work.reserve(data.size());
  const double x_lo = candidates.xs.front();
  const double x_hi = candidates.xs.back();
  for (const WeightedPoint& p : data) {
    work.push_back({apply_transform(fx, std::clamp(p.x, x_lo, x_hi)), p.y, p.weight});
  }

  const CondensedSet cond = condense_around_knots(work, t_cand);
  detail::CoreResult core = detail::greedy_core(cond.points, cond.constant, t_cand, config);

  struct Knot {
    double t;
    double x;
    double y;
  };
  std::vector<Knot> knots;
  knots.reserve(core.sel.size());
  for (std::size_t i = 0; i < core.sel.size(); ++i) {
    knots.push_back({t_cand[core.sel[i]], candidates.xs[core.sel[i]], core.y[i]});
  }

  // Drop interior knots that sit on the line between their neighbors (in
  // transformed space); they do not change the function. This collapses
  // e.g. constant-y fits to a plain 2-knot curve.
  double y_scale = 0.0;
  for (const Knot& k : knots) y_scale = std::max(y_scale, std::abs(k.y));
  const double tol = 1e-9 * y_scale;
  bool removed = true;
  while (removed && knots.size() > 2) {
    removed = false;
    for (std::size_t i = 1; i + 1 < knots.size(); ++i) {
      const double u = (knots[i].t - knots[i - 1].t) / (knots[i + 1].t - knots[i - 1].t);
      const double lerp = knots[i - 1].y + (knots[i + 1].y - knots[i - 1].y) * u;
      if (std::abs(knots[i].y - lerp) <= tol) {
        knots.erase(knots.begin() + static_cast<std::ptrdiff_t>(i));
        removed = true;
        break;
      }
    }
  }

  std::vector<ControlPoint> points;
  points.reserve(knots.size());
  for (const Knot& k : knots) points.push_back({k.x, k.y});
  return {PWLCurve(std::move(name), std::move(points), fx), std::move(core.diag)};
}

inline PWLCurve fit_pwl(const PointSet& pts, const FitConfig& config = {},
                        std::string name = "curve") {
  return fit_pwl_result(pts, config, std::move(name)).curve;
}

}  // namespace pwl
