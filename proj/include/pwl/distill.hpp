#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include "pwl/curve.hpp"
#include "pwl/error.hpp"
#include "pwl/fitter.hpp"
#include "pwl/model.hpp"
#include "pwl/point.hpp"

namespace pwl {

enum class FeatureKind { kNumerical, kCategorical };

// Per-feature teacher samples: x is the feature value (or category code),
// y is the teacher sub-function's output at that value.
struct FeatureSamples {
  std::string name;
  FeatureKind kind = FeatureKind::kNumerical;
  PointSet samples;
};

struct TeacherSampleTable {
  std::vector<FeatureSamples> features;
};

inline void validate(const TeacherSampleTable& table) {
  std::set<std::string> names;
  for (const FeatureSamples& f : table.features) {
    if (!names.insert(f.name).second) {
      throw std::invalid_argument("duplicate feature name in teacher table: " + f.name);
    }
  }
}

namespace detail {

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Stable per-feature seed so feature order and parallelism cannot change
// any individual fit.
inline std::uint64_t feature_seed(std::uint64_t base_seed, std::string_view name) {
  return mix64(base_seed ^ fnv1a64(name));
}

}  // namespace detail

inline PWLCurve distill_numeric_feature(const PointSet& samples, const FitConfig& config,
                                        std::string name = "f") {
  return fit_pwl(samples, config, std::move(name));
}

// Maps each distinct category code to the weighted mean teacher output; the
// default for unseen codes is the overall weighted mean.
inline EnumCurve distill_categorical_feature(const PointSet& samples, std::string name = "f") {
  if (samples.empty()) {
    throw InsufficientDataError("categorical distillation requires at least one sample");
  }
  validate_points(samples);
  std::map<double, std::pair<double, double>> acc;  // key -> (sum w, sum w*y)
  double sum_w = 0.0, sum_wy = 0.0;
  for (const WeightedPoint& p : samples) {
    auto& [w, wy] = acc[p.x];
    w += p.weight;
    wy += p.weight * p.y;
    sum_w += p.weight;
    sum_wy += p.weight * p.y;
  }
  std::map<double, double> mapping;
  for (const auto& [key, sums] : acc) mapping[key] = sums.second / sums.first;
  return EnumCurve(std::move(name), std::move(mapping), sum_wy / sum_w);
}

// Distills every feature independently (numerical -> PWLCurve, categorical ->
// EnumCurve) into an additive model with zero bias. Features are fitted in
// parallel; per-feature seeds keep the result identical either way.
inline CurveModel distill_model(const TeacherSampleTable& teacher, const FitConfig& config) {
  validate(teacher);
  const std::size_t n = teacher.features.size();
  std::vector<std::optional<CurveComponent>> results(n);
  std::vector<std::string> errors(n);

  auto distill_one = [&](std::size_t i) {
    const FeatureSamples& f = teacher.features[i];
    try {
      if (f.kind == FeatureKind::kCategorical) {
        results[i] = distill_categorical_feature(f.samples, f.name);
      } else {
        FitConfig per_feature = config;
        per_feature.seed = detail::feature_seed(config.seed, f.name);
        results[i] = distill_numeric_feature(f.samples, per_feature, f.name);
      }
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  };

  const std::size_t workers =
      std::min<std::size_t>(n, std::max(1u, std::thread::hardware_concurrency()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) distill_one(i);
  } else {
    std::atomic<std::size_t> next{0};
    auto run = [&] {
      for (std::size_t i; (i = next.fetch_add(1)) < n;) distill_one(i);
    };
    std::vector<std::thread> threads;
    threads.reserve(workers - 1);
    for (std::size_t t = 0; t + 1 < workers; ++t) threads.emplace_back(run);
    run();
    for (std::thread& t : threads) t.join();
  }

  std::string failure;
  for (std::size_t i = 0; i < n; ++i) {
    if (!results[i] && !errors[i].empty()) {
      if (!failure.empty()) failure += "; ";
      failure += teacher.features[i].name + ": " + errors[i];
    }
  }
  if (!failure.empty()) {
    throw std::runtime_error("distillation failed for feature(s): " + failure);
  }

  std::vector<CurveComponent> components;
  components.reserve(n);
  for (std::size_t i = 0; i < n; ++i) components.push_back(std::move(*results[i]));
  return CurveModel(std::move(components), 0.0);
}

struct AttributionEntry {
  std::string feature;
  double delta = 0.0;
};

// One row per distilled feature, sorted worst-first.
using AttributionReport = std::vector<AttributionEntry>;

// For each feature, the mean squared error between the teacher sub-function
// and its distilled curve over the evaluation samples. Replacing one
// sub-function in an additive model shifts the total score by exactly the
// per-feature approximation error, so this delta is the per-feature MSE
// against the teacher.
inline AttributionReport attribute_failures(const TeacherSampleTable& teacher,
                                            const TeacherSampleTable& eval_pts,
                                            const FitConfig& config) {
  const CurveModel model = distill_model(teacher, config);

  AttributionReport report;
  report.reserve(teacher.features.size());
  for (std::size_t i = 0; i < teacher.features.size(); ++i) {
    const std::string& name = teacher.features[i].name;
    const FeatureSamples* eval_feature = nullptr;
    for (const FeatureSamples& f : eval_pts.features) {
      if (f.name == name) {
        eval_feature = &f;
        break;
      }
    }
    if (eval_feature == nullptr || eval_feature->samples.empty()) {
      throw MissingFeatureError("evaluation data missing feature: " + name);
    }
    const CurveComponent& curve = model.components()[i];
    double sum_w = 0.0, sum_werr = 0.0;
    for (const WeightedPoint& p : eval_feature->samples) {
      const double r = component_eval(curve, p.x) - p.y;
      sum_w += p.weight;
      sum_werr += p.weight * r * r;
    }
    report.push_back({name, sum_werr / sum_w});
  }

  std::stable_sort(report.begin(), report.end(),
                   [](const AttributionEntry& a, const AttributionEntry& b) {
                     return a.delta > b.delta;
                   });
  return report;
}

}  // namespace pwl
