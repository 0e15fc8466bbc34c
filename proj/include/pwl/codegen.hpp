#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pwl/curve.hpp"
#include "pwl/error.hpp"
#include "pwl/model.hpp"
#include "pwl/transform.hpp"

namespace pwl {

namespace detail {

// Rounds v to `sig` significant decimal digits and renders it in the shortest
// plain form: integers without a decimal point, fixed notation while the
// exponent stays in [-4, 15], scientific outside. Rounding of exact decimal
// ties is half-to-even, delegated to printf's correctly-rounded %e.
inline std::string format_significant(double v, int sig) {
  sig = std::clamp(sig, 1, 17);
  if (v == 0.0) return "0";

  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*e", sig - 1, v);

  // Split "d.dddde±XX" into digits and exponent.
  const bool negative = buf[0] == '-';
  const char* s = buf + (negative ? 1 : 0);
  std::string digits;
  int exponent = 0;
  for (; *s != '\0'; ++s) {
    if (*s == '.') continue;
    if (*s == 'e' || *s == 'E') {
      exponent = std::atoi(s + 1);
      break;
    }
    digits.push_back(*s);
  }
  while (digits.size() > 1 && digits.back() == '0') digits.pop_back();
  const int ndigits = static_cast<int>(digits.size());

  std::string out;
  if (negative) out.push_back('-');
  if (exponent >= ndigits - 1 && exponent < 16) {
    // Integral value: digits padded with zeros.
    out += digits;
    out.append(static_cast<std::size_t>(exponent - (ndigits - 1)), '0');
  } else if (exponent >= 0 && exponent < 16) {
    out += digits.substr(0, static_cast<std::size_t>(exponent + 1));
    out.push_back('.');
    out += digits.substr(static_cast<std::size_t>(exponent + 1));
  } else if (exponent < 0 && exponent >= -4) {
    out += "0.";
    out.append(static_cast<std::size_t>(-exponent - 1), '0');
    out += digits;
  } else {
    out += digits.substr(0, 1);
    if (ndigits > 1) {
      out.push_back('.');
      out += digits.substr(1);
    }
    out.push_back('e');
    std::snprintf(buf, sizeof(buf), "%+03d", exponent);
    out += buf;
  }
  return out;
}

inline std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace detail

// `PWLCurve("name", [(x1, y1), ...], fx="log")`; the fx clause is omitted for
// the identity transform. Control points are rounded to sig_digits
// significant digits.
inline std::string emit_curve_literal(const PWLCurve& curve, int sig_digits = 4) {
  std::string out = "PWLCurve(" + detail::quote(curve.name()) + ", [";
  bool first = true;
  for (const ControlPoint& p : curve.points()) {
    if (!first) out += ", ";
    first = false;
    out += "(" + detail::format_significant(p.x, sig_digits) + ", " +
           detail::format_significant(p.y, sig_digits) + ")";
  }
  out += "]";
  if (curve.fx() != Transform::kIdentity) {
    out += std::string(", fx=\"") + transform_name(curve.fx()) + "\"";
  }
  out += ")";
  return out;
}

// `EnumCurve("name", {k1: v1, ...})` with keys in ascending order; a nonzero
// fallback value is spelled as a trailing `default=` clause.
inline std::string emit_curve_literal(const EnumCurve& curve, int sig_digits = 4) {
  std::string out = "EnumCurve(" + detail::quote(curve.name()) + ", {";
  bool first = true;
  for (const auto& [key, value] : curve.mapping()) {
    if (!first) out += ", ";
    first = false;
    out += detail::format_significant(key, sig_digits) + ": " +
           detail::format_significant(value, sig_digits);
  }
  out += "}";
  if (curve.default_value() != 0.0) {
    out += ", default=" + detail::format_significant(curve.default_value(), sig_digits);
  }
  out += ")";
  return out;
}

inline std::string emit_curve_literal(const CurveComponent& component, int sig_digits = 4) {
  return std::visit([&](const auto& c) { return emit_curve_literal(c, sig_digits); }, component);
}

// Whole model as a readable score expression, one component per line.
inline std::string emit_model_code(const CurveModel& model, int sig_digits = 4) {
  std::string out = "score = sum([\n";
  if (model.bias() != 0.0) {
    out += "  " + detail::format_significant(model.bias(), sig_digits) + ",\n";
  }
  for (const CurveComponent& c : model.components()) {
    out += "  " + emit_curve_literal(c, sig_digits) + ",\n";
  }
  out += "])\n";
  return out;
}

namespace detail {

class LiteralParser {
 public:
  explicit LiteralParser(std::string_view text) : text_(text) {}

  CurveComponent parse() {
    const std::string head = expect_identifier("PWLCurve or EnumCurve");
    std::optional<CurveComponent> out;
    if (head == "PWLCurve") {
      out = parse_pwl();
    } else if (head == "EnumCurve") {
      out = parse_enum();
    } else {
      fail("expected PWLCurve or EnumCurve, got '" + head + "'");
    }
    skip_space();
    if (pos_ < text_.size()) fail("unexpected trailing text");
    return std::move(*out);
  }

 private:
  PWLCurve parse_pwl() {
    expect('(');
    const std::string name = expect_string();
    expect(',');
    expect('[');
    std::vector<ControlPoint> points;
    skip_space();
    while (!consume(']')) {
      expect('(');
      const double x = expect_number();
      expect(',');
      const double y = expect_number();
      expect(')');
      if (!points.empty() && !(points.back().x < x)) {
        fail(points.back().x == x ? "duplicate x-knot" : "x-knots must be strictly increasing");
      }
      points.push_back({x, y});
      if (!consume(',')) {
        expect(']');
        break;
      }
      skip_space();
    }
    Transform fx = Transform::kIdentity;
    if (consume(',')) {
      const int mark_line = line_, mark_col = column_;
      const std::string key = expect_identifier("fx");
      if (key != "fx") fail_at("expected 'fx', got '" + key + "'", mark_line, mark_col);
      expect('=');
      const int value_line = line_, value_col = column_;
      const std::string value = expect_string();
      try {
        fx = transform_from_name(value);
      } catch (const std::invalid_argument&) {
        fail_at("unknown fx: \"" + value + "\"", value_line, value_col);
      }
    }
    expect(')');
    try {
      return PWLCurve(name, std::move(points), fx);
    } catch (const std::invalid_argument& e) {
      fail(e.what());
    }
  }

  EnumCurve parse_enum() {
    expect('(');
    const std::string name = expect_string();
    expect(',');
    expect('{');
    std::map<double, double> mapping;
    skip_space();
    while (!consume('}')) {
      const int key_line = line_, key_col = column_;
      const double key = expect_number();
      expect(':');
      const double value = expect_number();
      if (!mapping.emplace(key, value).second) {
        fail_at("duplicate enum key", key_line, key_col);
      }
      if (!consume(',')) {
        expect('}');
        break;
      }
      skip_space();
    }
    double default_value = 0.0;
    if (consume(',')) {
      const int mark_line = line_, mark_col = column_;
      const std::string key = expect_identifier("default");
      if (key != "default") fail_at("expected 'default', got '" + key + "'", mark_line, mark_col);
      expect('=');
      default_value = expect_number();
    }
    expect(')');
    try {
      return EnumCurve(name, std::move(mapping), default_value);
    } catch (const std::invalid_argument& e) {
      fail(e.what());
    }
  }

  void skip_space() {
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (c == '\n') {
        ++line_;
        column_ = 1;
        ++pos_;
      } else if (c == ' ' || c == '\t' || c == '\r') {
        ++column_;
        ++pos_;
      } else {
        break;
      }
    }
  }

  bool consume(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      ++column_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!consume(c)) fail(std::string("expected '") + c + "'");
  }

  std::string expect_identifier(const std::string& what) {
    skip_space();
    std::string out;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      out.push_back(text_[pos_]);
      ++pos_;
      ++column_;
    }
    if (out.empty()) fail("expected " + what);
    return out;
  }

  std::string expect_string() {
    skip_space();
    if (pos_ >= text_.size() || text_[pos_] != '"') fail("expected string");
    ++pos_;
    ++column_;
    std::string out;
    while (pos_ < text_.size() && text_[pos_] != '"') {
      char c = text_[pos_];
      if (c == '\n') fail("unterminated string");
      if (c == '\\' && pos_ + 1 < text_.size()) {
        ++pos_;
        ++column_;
        c = text_[pos_];
      }
      out.push_back(c);
      ++pos_;
      ++column_;
    }
    if (pos_ >= text_.size()) fail("unterminated string");
    ++pos_;
    ++column_;
    return out;
  }

  double expect_number() {
    skip_space();
    if (pos_ >= text_.size()) fail("expected number");
    const char* begin = text_.data() + pos_;
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin) fail("expected number");
    if (!std::isfinite(v)) fail("number out of range");
    const std::size_t used = static_cast<std::size_t>(end - begin);
    pos_ += used;
    column_ += static_cast<int>(used);
    return v;
  }

  [[noreturn]] void fail(const std::string& message) const {
    throw ParseError(message, line_, column_);
  }

  [[noreturn]] static void fail_at(const std::string& message, int line, int column) {
    throw ParseError(message, line, column);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int column_ = 1;
};

}  // namespace detail

// Inverse of emit_curve_literal up to the rounding applied at emission.
inline CurveComponent parse_curve_literal(const std::string& text) {
  return detail::LiteralParser(text).parse();
}

}  // namespace pwl
