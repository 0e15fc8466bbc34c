#pragma once

#include <stdexcept>
#include <string>

namespace pwl {

// Thrown when a fit or sampling step is asked to work with data that cannot
// support it (e.g. fewer than two distinct x-values).
class InsufficientDataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Thrown by model evaluation when a required feature is absent from the input.
class MissingFeatureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Thrown by the curve-literal parser. Carries a 1-based source position.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& message, int line, int column)
      : std::runtime_error("parse error at line " + std::to_string(line) +
                           ", column " + std::to_string(column) + ": " + message),
        line_(line),
        column_(column) {}

  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

}  // namespace pwl
