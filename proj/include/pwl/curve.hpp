#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pwl/transform.hpp"

namespace pwl {

struct ControlPoint {
  double x = 0.0;
  double y = 0.0;
};

// Piecewise-linear curve through ordered control points. Interpolation runs in
// fx-transformed x-space; outputs are clamped to the boundary y-values outside
// the knot range (the clamp happens before the transform, so out-of-range
// inputs never hit the transform's domain).
class PWLCurve {
 public:
  PWLCurve(std::string name, std::vector<ControlPoint> points,
           Transform fx = Transform::kIdentity)
      : name_(std::move(name)), points_(std::move(points)), fx_(fx) {
    if (points_.size() < 2) {
      throw std::invalid_argument("PWLCurve requires at least 2 control points");
    }
    for (std::size_t i = 0; i < points_.size(); ++i) {
      const ControlPoint& p = points_[i];
      if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
        throw std::invalid_argument("PWLCurve control points must be finite");
      }
      if (i > 0 && !(points_[i - 1].x < p.x)) {
        throw std::invalid_argument("PWLCurve x-values must be strictly increasing");
      }
      if (!transform_admits(fx_, p.x)) {
        throw std::invalid_argument("PWLCurve control point outside transform domain");
      }
    }
  }

  double eval(double x) const {
    if (x <= points_.front().x) return points_.front().y;
    if (x >= points_.back().x) return points_.back().y;
    // First knot with knot.x >= x; x is strictly inside the knot range here.
    auto it = std::lower_bound(
        points_.begin(), points_.end(), x,
        [](const ControlPoint& c, double v) { return c.x < v; });
    if (it->x == x) return it->y;
    const ControlPoint& hi = *it;
    const ControlPoint& lo = *(it - 1);
    const double t0 = apply_transform(fx_, lo.x);
    const double t1 = apply_transform(fx_, hi.x);
    const double t = apply_transform(fx_, x);
    return lo.y + (hi.y - lo.y) * ((t - t0) / (t1 - t0));
  }

  double operator()(double x) const { return eval(x); }

  const std::string& name() const { return name_; }
  const std::vector<ControlPoint>& points() const { return points_; }
  Transform fx() const { return fx_; }
  std::size_t num_segments() const { return points_.size() - 1; }

 private:
  std::string name_;
  std::vector<ControlPoint> points_;
  Transform fx_;
};

// Discrete key -> value mapping for categorical features. Unseen keys fall
// back to a stored default (0, the additive identity, unless specified).
class EnumCurve {
 public:
  EnumCurve(std::string name, std::map<double, double> mapping, double default_value = 0.0)
      : name_(std::move(name)), mapping_(std::move(mapping)), default_(default_value) {
    for (const auto& [key, value] : mapping_) {
      if (!std::isfinite(key) || !std::isfinite(value)) {
        throw std::invalid_argument("EnumCurve keys and values must be finite");
      }
    }
    if (!std::isfinite(default_)) {
      throw std::invalid_argument("EnumCurve default must be finite");
    }
  }

  double eval(double key) const {
    auto it = mapping_.find(key);
    return it == mapping_.end() ? default_ : it->second;
  }

  double operator()(double key) const { return eval(key); }

  const std::string& name() const { return name_; }
  const std::map<double, double>& mapping() const { return mapping_; }
  double default_value() const { return default_; }

 private:
  std::string name_;
  std::map<double, double> mapping_;
  double default_;
};

}  // namespace pwl
