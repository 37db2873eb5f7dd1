#pragma once

// Tabular output shared by the command-line tools: one table model written
// as CSV or JSON.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "fiid/errors.hpp"

namespace fiid {

/// %.17g, enough digits to read the same double back.
inline std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

/// Empty cells stand for values that do not apply to a row.
using Cell = std::variant<std::monostate, std::string, double, std::int64_t, std::uint64_t, bool>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add(std::vector<Cell> row) {
    require(row.size() == columns.size(), "row width does not match the header");
    rows.push_back(std::move(row));
  }
};

inline std::string cell_text(const Cell& c) {
  struct {
    std::string operator()(std::monostate) const { return ""; }
    std::string operator()(const std::string& s) const { return s; }
    std::string operator()(double x) const { return format_double(x); }
    std::string operator()(std::int64_t x) const { return std::to_string(x); }
    std::string operator()(std::uint64_t x) const { return std::to_string(x); }
    std::string operator()(bool b) const { return b ? "true" : "false"; }
  } visit;
  return std::visit(visit, c);
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

inline std::string to_csv(const Table& t) {
  std::ostringstream out;
  for (std::size_t i = 0; i < t.columns.size(); ++i) out << (i ? "," : "") << csv_field(t.columns[i]);
  out << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << csv_field(cell_text(row[i]));
    out << '\n';
  }
  return out.str();
}

/// Array of row objects; non-finite doubles become null.
inline nlohmann::json to_json(const Table& t) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : t.rows) {
    nlohmann::json obj = nlohmann::json::object();
    for (std::size_t i = 0; i < row.size(); ++i) {
      const Cell& c = row[i];
      nlohmann::json v;
      if (const auto* s = std::get_if<std::string>(&c)) v = *s;
      else if (const auto* x = std::get_if<double>(&c)) v = std::isfinite(*x) ? nlohmann::json(*x) : nlohmann::json();
      else if (const auto* i64 = std::get_if<std::int64_t>(&c)) v = *i64;
      else if (const auto* u64 = std::get_if<std::uint64_t>(&c)) v = *u64;
      else if (const auto* b = std::get_if<bool>(&c)) v = *b;
      obj[t.columns[i]] = v;
    }
    rows.push_back(std::move(obj));
  }
  return rows;
}

inline std::string render(const Table& t, const std::string& format) {
  if (format == "csv") return to_csv(t);
  if (format == "json") return to_json(t).dump(2) + "\n";
  throw InputError("format: expected csv or json, got '" + format + "'");
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

inline void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write " + path);
  out << contents;
  if (!out) throw InputError("failed writing " + path);
}

}  // namespace fiid
