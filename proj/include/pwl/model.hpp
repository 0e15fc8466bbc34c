#pragma once

#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include "pwl/curve.hpp"
#include "pwl/error.hpp"

namespace pwl {

using CurveComponent = std::variant<PWLCurve, EnumCurve>;

inline const std::string& component_name(const CurveComponent& c) {
  return std::visit([](const auto& curve) -> const std::string& { return curve.name(); }, c);
}

inline double component_eval(const CurveComponent& c, double x) {
  return std::visit([x](const auto& curve) { return curve.eval(x); }, c);
}

using FeatureMap = std::unordered_map<std::string, double>;

// Additive model: bias plus one curve per feature.
class CurveModel {
 public:
  CurveModel() = default;

  CurveModel(std::vector<CurveComponent> components, double bias = 0.0)
      : components_(std::move(components)), bias_(bias) {
    std::set<std::string> names;
    for (const CurveComponent& c : components_) {
      if (!names.insert(component_name(c)).second) {
        throw std::invalid_argument("duplicate feature name in model: " + component_name(c));
      }
    }
  }

  double eval(const FeatureMap& features) const {
    double score = bias_;
    for (const CurveComponent& c : components_) {
      auto it = features.find(component_name(c));
      if (it == features.end()) {
        throw MissingFeatureError("feature missing from input: " + component_name(c));
      }
      score += component_eval(c, it->second);
    }
    return score;
  }

  double operator()(const FeatureMap& features) const { return eval(features); }

  const std::vector<CurveComponent>& components() const { return components_; }
  double bias() const { return bias_; }

 private:
  std::vector<CurveComponent> components_;
  double bias_ = 0.0;
};

}  // namespace pwl
