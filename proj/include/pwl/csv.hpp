#pragma once

#include <cstdlib>
#include <istream>
#include <stdexcept>
#include <string>
#include <vector>

#include "pwl/point.hpp"

namespace pwl {

// Minimal CSV support: comma-separated, '.' decimal, UTF-8, first row is the
// header. No quoting or locale handling; fixtures are expected to be plain.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column_index(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    throw std::runtime_error("CSV column not found: " + name);
  }

  bool has_column(const std::string& name) const {
    for (const std::string& h : header) {
      if (h == name) return true;
    }
    return false;
  }
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  for (char c : line) {
    if (c == ',') {
      cells.push_back(cell);
      cell.clear();
    } else {
      cell.push_back(c);
    }
  }
  cells.push_back(cell);
  return cells;
}

}  // namespace detail

inline double csv_to_double(const std::string& cell, std::size_t line_number) {
  const char* begin = cell.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0') {
    throw std::runtime_error("CSV line " + std::to_string(line_number) +
                             ": not a number: '" + cell + "'");
  }
  return v;
}

inline CsvTable read_csv(std::istream& in) {
  CsvTable table;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells = detail::split_csv_line(line);
    if (line_number == 1) {
      table.header = std::move(cells);
      continue;
    }
    if (cells.size() != table.header.size()) {
      throw std::runtime_error("CSV line " + std::to_string(line_number) +
                               ": expected " + std::to_string(table.header.size()) +
                               " columns, got " + std::to_string(cells.size()));
    }
    table.rows.push_back(std::move(cells));
  }
  if (table.header.empty()) throw std::runtime_error("CSV input is empty");
  return table;
}

// Columns x, y and optional weight, located by name.
inline PointSet points_from_csv(const CsvTable& table) {
  const std::size_t xi = table.column_index("x");
  const std::size_t yi = table.column_index("y");
  const bool has_weight = table.has_column("weight");
  const std::size_t wi = has_weight ? table.column_index("weight") : 0;
  PointSet pts;
  pts.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const std::size_t line_number = r + 2;  // 1-based, after the header
    WeightedPoint p;
    p.x = csv_to_double(table.rows[r][xi], line_number);
    p.y = csv_to_double(table.rows[r][yi], line_number);
    p.weight = has_weight ? csv_to_double(table.rows[r][wi], line_number) : 1.0;
    pts.push_back(p);
  }
  return pts;
}

}  // namespace pwl
