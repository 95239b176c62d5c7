#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

namespace cprgg {

using Cell = std::variant<std::int64_t, double, std::string>;

/// Rows of named columns plus a JSON summary. Numbers are written with
/// %.17g and integers exactly, so equal tables give equal bytes.
struct ResultTable {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  nlohmann::json summary = nlohmann::json::object();

  explicit ResultTable(std::vector<std::string> cols = {}) : columns(std::move(cols)) {}

  void add_row(std::vector<Cell> row);
  /// Index of a column; throws std::invalid_argument naming it if absent.
  std::size_t column(const std::string& name) const;
  /// Numeric value of a cell (integers widened, strings parsed).
  double number(std::size_t row, std::size_t col) const;
};

/// RFC 4180 style: fields with ',', '"' or newlines are quoted and quotes
/// doubled; lines end with "\n".
void write_csv(std::ostream& out, const ResultTable& table);
std::string to_csv(const ResultTable& table);
/// Reads a header plus rows; cells parsing fully as integers or doubles are
/// stored as numbers, the rest as strings.
ResultTable read_csv(std::istream& in);

std::string format_number(double v);

struct PlotSpec {
  std::string x;
  std::vector<std::string> y;  // one series per column
};

/// Tidy long-format table (x, y, series) with one row per input row and y
/// column. Unknown columns throw std::invalid_argument naming the column.
ResultTable emit_plot_data(const ResultTable& table, const PlotSpec& spec);

}  // namespace cprgg
