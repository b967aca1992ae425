#pragma once

// Tabular reports with per-column units, emitted as CSV or JSON.

#include <nlohmann/json.hpp>

#include <ostream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "rydgate/error.hpp"
#include "rydgate/numfmt.hpp"

namespace rydgate {

using Cell = std::variant<double, long, std::string>;

struct Column {
  std::string name;
  std::string unit;  // "1" for dimensionless, "-" for text
};

struct ReportRow {
  std::string label;
  std::vector<Cell> values;
};

struct Table {
  std::string name;
  std::vector<Column> columns;
  std::vector<ReportRow> rows;

  void add(std::string label, std::vector<Cell> values) {
    if (values.size() != columns.size()) throw std::logic_error("row width does not match table " + name);
    rows.push_back({std::move(label), std::move(values)});
  }

  std::size_t column(const std::string& col) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
      if (columns[i].name == col) return i;
    throw LookupError("table " + name + " has no column " + col);
  }

  double number(std::size_t row, const std::string& col) const {
    const auto& c = rows.at(row).values.at(column(col));
    if (const auto* d = std::get_if<double>(&c)) return *d;
    if (const auto* l = std::get_if<long>(&c)) return static_cast<double>(*l);
    throw LookupError("column " + col + " is not numeric");
  }
};

struct Report {
  std::string command;
  std::vector<std::pair<std::string, std::string>> metadata;
  std::vector<Table> tables;

  const Table& table(const std::string& name) const {
    for (const auto& t : tables)
      if (t.name == name) return t;
    throw LookupError("report has no table " + name);
  }
};

enum class OutputFormat { csv, json };

inline OutputFormat parse_format(const std::string& s) {
  if (s == "csv") return OutputFormat::csv;
  if (s == "json") return OutputFormat::json;
  throw ConfigError("unknown output format '" + s + "'");
}

inline std::string cell_text(const Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) return format_g17(*d);
  if (const auto* l = std::get_if<long>(&c)) return std::to_string(*l);
  return std::get<std::string>(c);
}

inline void write_csv(std::ostream& out, const Report& r) {
  out << "# command=" << r.command << '\n';
  for (const auto& [k, v] : r.metadata) out << "# " << k << '=' << v << '\n';
  bool first = true;
  for (const auto& t : r.tables) {
    if (!first) out << '\n';
    first = false;
    out << "# table=" << t.name << '\n' << "# units: label=-";
    for (const auto& c : t.columns) out << ", " << c.name << '=' << c.unit;
    out << '\n' << "label";
    for (const auto& c : t.columns) out << ',' << c.name;
    out << '\n';
    for (const auto& row : t.rows) {
      out << row.label;
      for (const auto& v : row.values) out << ',' << cell_text(v);
      out << '\n';
    }
  }
}

inline nlohmann::ordered_json to_json(const Report& r) {
  nlohmann::ordered_json j;
  j["command"] = r.command;
  auto& meta = j["metadata"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : r.metadata) meta[k] = v;
  auto& tables = j["tables"] = nlohmann::ordered_json::array();
  for (const auto& t : r.tables) {
    nlohmann::ordered_json jt;
    jt["name"] = t.name;
    auto& units = jt["units"] = nlohmann::ordered_json::object();
    for (const auto& c : t.columns) units[c.name] = c.unit;
    auto& rows = jt["rows"] = nlohmann::ordered_json::array();
    for (const auto& row : t.rows) {
      nlohmann::ordered_json jr;
      jr["label"] = row.label;
      for (std::size_t i = 0; i < t.columns.size(); ++i)
        std::visit([&](const auto& v) { jr[t.columns[i].name] = v; }, row.values[i]);
      rows.push_back(std::move(jr));
    }
    tables.push_back(std::move(jt));
  }
  return j;
}

inline void write_report(std::ostream& out, const Report& r, OutputFormat format) {
  if (format == OutputFormat::csv) write_csv(out, r);
  else out << to_json(r).dump(2) << '\n';
}

}  // namespace rydgate
