#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace pwl {

// Strictly increasing input transforms applied before linear interpolation.
// log is admissible for x > 0, log1p for x > -1, symlog1p everywhere.
enum class Transform {
  kIdentity,
  kLog,
  kLog1p,
  kSymlog1p,
};

inline bool transform_admits(Transform fx, double x) {
  switch (fx) {
    case Transform::kLog:
      return x > 0.0;
    case Transform::kLog1p:
      return x > -1.0;
    case Transform::kIdentity:
    case Transform::kSymlog1p:
      return true;
  }
  return false;
}

inline double apply_transform(Transform fx, double x) {
  switch (fx) {
    case Transform::kIdentity:
      return x;
    case Transform::kLog:
      if (!(x > 0.0)) throw std::domain_error("log transform requires x > 0");
      return std::log(x);
    case Transform::kLog1p:
      if (!(x > -1.0)) throw std::domain_error("log1p transform requires x > -1");
      return std::log1p(x);
    case Transform::kSymlog1p:
      // sgn(x) * log1p(abs(x))
      return x < 0.0 ? -std::log1p(-x) : std::log1p(x);
  }
  throw std::invalid_argument("unknown transform");
}

inline const char* transform_name(Transform fx) {
  switch (fx) {
    case Transform::kIdentity:
      return "identity";
    case Transform::kLog:
      return "log";
    case Transform::kLog1p:
      return "log1p";
    case Transform::kSymlog1p:
      return "symlog1p";
  }
  return "unknown";
}

inline Transform transform_from_name(const std::string& name) {
  if (name == "identity") return Transform::kIdentity;
  if (name == "log") return Transform::kLog;
  if (name == "log1p") return Transform::kLog1p;
  if (name == "symlog1p") return Transform::kSymlog1p;
  throw std::invalid_argument("unknown transform name: " + name);
}

}  // namespace pwl
