#include "cprgg/table.hpp"

#include <charconv>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace cprgg {

void ResultTable::add_row(std::vector<Cell> row) {
  if (row.size() != columns.size()) {
    throw std::invalid_argument("result table: row has " + std::to_string(row.size()) + " cells, expected " +
                                std::to_string(columns.size()));
  }
  rows.push_back(std::move(row));
}

std::size_t ResultTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) return i;
  }
  throw std::invalid_argument("result table: unknown column '" + name + "'");
}

double ResultTable::number(std::size_t row, std::size_t col) const {
  const Cell& c = rows.at(row).at(col);
  if (auto i = std::get_if<std::int64_t>(&c)) return double(*i);
  if (auto d = std::get_if<double>(&c)) return *d;
  return std::stod(std::get<std::string>(c));
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string render(const Cell& c) {
  if (auto i = std::get_if<std::int64_t>(&c)) return std::to_string(*i);
  if (auto d = std::get_if<double>(&c)) return format_number(*d);
  return quote(std::get<std::string>(c));
}

// Splits one CSV record, honouring quotes that may span lines.
bool read_record(std::istream& in, std::vector<std::string>& fields) {
  fields.clear();
  std::string field;
  bool quoted = false, any = false;
  char c;
  while (in.get(c)) {
    any = true;
    if (quoted) {
      if (c == '"') {
        if (in.peek() == '"') {
          field += '"';
          in.get();
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c == '\n') {
      break;
    } else if (c != '\r') {
      field += c;
    }
  }
  if (!any) return false;
  fields.push_back(std::move(field));
  return true;
}

Cell parse_cell(const std::string& s) {
  std::int64_t i = 0;
  auto [pi, ei] = std::from_chars(s.data(), s.data() + s.size(), i);
  if (ei == std::errc() && pi == s.data() + s.size() && !s.empty()) return i;
  double d = 0.0;
  auto [pd, ed] = std::from_chars(s.data(), s.data() + s.size(), d);
  if (ed == std::errc() && pd == s.data() + s.size() && !s.empty()) return d;
  return s;
}

}  // namespace

void write_csv(std::ostream& out, const ResultTable& table) {
  for (std::size_t i = 0; i < table.columns.size(); ++i) out << (i ? "," : "") << quote(table.columns[i]);
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << render(row[i]);
    out << '\n';
  }
}

std::string to_csv(const ResultTable& table) {
  std::ostringstream out;
  write_csv(out, table);
  return out.str();
}

ResultTable read_csv(std::istream& in) {
  ResultTable t;
  std::vector<std::string> fields;
  if (!read_record(in, fields)) throw std::runtime_error("csv: missing header");
  t.columns = fields;
  std::size_t line = 1;
  while (read_record(in, fields)) {
    ++line;
    if (fields.size() == 1 && fields[0].empty()) continue;
    if (fields.size() != t.columns.size()) {
      throw std::runtime_error("csv: record " + std::to_string(line) + " has " + std::to_string(fields.size()) +
                               " fields, expected " + std::to_string(t.columns.size()));
    }
    std::vector<Cell> row;
    for (const auto& f : fields) row.push_back(parse_cell(f));
    t.rows.push_back(std::move(row));
  }
  return t;
}

ResultTable emit_plot_data(const ResultTable& table, const PlotSpec& spec) {
  const std::size_t xc = table.column(spec.x);
  std::vector<std::size_t> yc;
  for (const auto& y : spec.y) yc.push_back(table.column(y));
  ResultTable out({"x", "y", "series"});
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    for (std::size_t k = 0; k < yc.size(); ++k) {
      out.rows.push_back({table.rows[r][xc], table.rows[r][yc[k]], spec.y[k]});
    }
  }
  return out;
}

}  // namespace cprgg
