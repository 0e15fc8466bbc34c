#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "pwl/curve.hpp"
#include "pwl/distill.hpp"
#include "pwl/model.hpp"
#include "pwl/transform.hpp"

namespace pwl {

inline nlohmann::json component_to_json(const CurveComponent& c) {
  nlohmann::json j;
  if (const auto* pwl_curve = std::get_if<PWLCurve>(&c)) {
    j["name"] = pwl_curve->name();
    j["type"] = "pwl";
    nlohmann::json points = nlohmann::json::array();
    for (const ControlPoint& p : pwl_curve->points()) {
      points.push_back(nlohmann::json::array({p.x, p.y}));
    }
    j["points"] = std::move(points);
    j["fx"] = transform_name(pwl_curve->fx());
  } else {
    const auto& enum_curve = std::get<EnumCurve>(c);
    j["name"] = enum_curve.name();
    j["type"] = "enum";
    nlohmann::json mapping = nlohmann::json::array();
    for (const auto& [key, value] : enum_curve.mapping()) {
      mapping.push_back(nlohmann::json::array({key, value}));
    }
    j["mapping"] = std::move(mapping);
    j["default"] = enum_curve.default_value();
  }
  return j;
}

// Canonical persistence format:
// {"bias": float, "components": [{"name": str, "type": "pwl"|"enum",
//   "points"|"mapping": [[a, b], ...], "fx": str, "default": float}]}
inline nlohmann::json model_to_json(const CurveModel& model) {
  nlohmann::json components = nlohmann::json::array();
  for (const CurveComponent& c : model.components()) {
    components.push_back(component_to_json(c));
  }
  nlohmann::json out;
  out["bias"] = model.bias();
  out["components"] = std::move(components);
  return out;
}

inline CurveModel model_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::runtime_error("model JSON must be an object");
  const double bias = j.value("bias", 0.0);
  std::vector<CurveComponent> components;
  for (const nlohmann::json& c : j.value("components", nlohmann::json::array())) {
    const std::string name = c.at("name").get<std::string>();
    const std::string type = c.at("type").get<std::string>();
    if (type == "pwl") {
      std::vector<ControlPoint> points;
      for (const nlohmann::json& p : c.at("points")) {
        points.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
      }
      const Transform fx = transform_from_name(c.value("fx", "identity"));
      components.emplace_back(PWLCurve(name, std::move(points), fx));
    } else if (type == "enum") {
      std::map<double, double> mapping;
      for (const nlohmann::json& p : c.at("mapping")) {
        mapping[p.at(0).get<double>()] = p.at(1).get<double>();
      }
      components.emplace_back(EnumCurve(name, std::move(mapping), c.value("default", 0.0)));
    } else {
      throw std::runtime_error("unknown component type: " + type);
    }
  }
  return CurveModel(std::move(components), bias);
}

inline std::string write_model_json(const CurveModel& model) {
  return model_to_json(model).dump(2) + "\n";
}

inline CurveModel read_model_json(const std::string& text) {
  return model_from_json(nlohmann::json::parse(text));
}

// Teacher sample tables:
// {"features": [{"name": str, "kind": "numerical"|"categorical",
//   "samples": [[x, y, weight?], ...]}]}
inline TeacherSampleTable teacher_table_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::runtime_error("teacher table JSON must be an object");
  TeacherSampleTable table;
  for (const nlohmann::json& f : j.at("features")) {
    FeatureSamples feature;
    feature.name = f.at("name").get<std::string>();
    const std::string kind = f.value("kind", "numerical");
    if (kind == "numerical") {
      feature.kind = FeatureKind::kNumerical;
    } else if (kind == "categorical") {
      feature.kind = FeatureKind::kCategorical;
    } else {
      throw std::runtime_error("unknown feature kind: " + kind);
    }
    for (const nlohmann::json& s : f.at("samples")) {
      if (!s.is_array() || s.size() < 2 || s.size() > 3) {
        throw std::runtime_error("teacher samples must be [x, y] or [x, y, weight]");
      }
      WeightedPoint p{s.at(0).get<double>(), s.at(1).get<double>(), 1.0};
      if (s.size() == 3) p.weight = s.at(2).get<double>();
      feature.samples.push_back(p);
    }
    table.features.push_back(std::move(feature));
  }
  validate(table);
  return table;
}

inline nlohmann::json teacher_table_to_json(const TeacherSampleTable& table) {
  nlohmann::json features = nlohmann::json::array();
  for (const FeatureSamples& f : table.features) {
    nlohmann::json jf;
    jf["name"] = f.name;
    jf["kind"] = f.kind == FeatureKind::kCategorical ? "categorical" : "numerical";
    nlohmann::json samples = nlohmann::json::array();
    for (const WeightedPoint& p : f.samples) {
      samples.push_back(nlohmann::json::array({p.x, p.y, p.weight}));
    }
    jf["samples"] = std::move(samples);
    features.push_back(std::move(jf));
  }
  nlohmann::json out;
  out["features"] = std::move(features);
  return out;
}

}  // namespace pwl
