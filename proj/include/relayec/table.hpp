// SPDX-License-Identifier: Apache-2.0
//
// Tabular experiment output in CSV or JSON.

#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

namespace relayec {

enum class TableFormat { Csv, Json };

/// Empty cell (an infeasible point, say). CSV writes nothing, JSON null.
struct Blank {
  friend bool operator==(Blank, Blank) = default;
};

using Cell = std::variant<Blank, double, std::int64_t, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

/// Raised when a table cannot be written; no file is left behind.
class EmitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// 12 significant digits, shortest form ("0.1", "1e-08", "3.45812345678").
inline std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 12);
  return std::string(buf, r.ptr);
}

inline std::string cell_text(const Cell& c) {
  struct {
    std::string operator()(Blank) const { return {}; }
    std::string operator()(double d) const { return format_double(d); }
    std::string operator()(std::int64_t i) const { return std::to_string(i); }
    std::string operator()(const std::string& s) const { return s; }
  } visit;
  return std::visit(visit, c);
}

namespace detail {

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + '"';
}

inline nlohmann::ordered_json json_value(const Cell& c) {
  if (std::holds_alternative<Blank>(c)) return nullptr;
  if (const auto* d = std::get_if<double>(&c)) {
    if (!std::isfinite(*d)) return format_double(*d);
    // Round-trip through the 12-digit text so CSV and JSON carry the same value.
    const std::string text = format_double(*d);
    double v = 0.0;
    std::from_chars(text.data(), text.data() + text.size(), v);
    return v;
  }
  if (const auto* i = std::get_if<std::int64_t>(&c)) return *i;
  return std::get<std::string>(c);
}

}  // namespace detail

inline void write_csv(std::ostream& os, const Table& t) {
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << detail::csv_field(t.columns[i]);
  os << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << detail::csv_field(cell_text(row[i]));
    os << '\n';
  }
}

/// Array of row objects with keys in column order.
inline void write_json(std::ostream& os, const Table& t) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& row : t.rows) {
    nlohmann::ordered_json obj = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < row.size(); ++i) obj[t.columns[i]] = detail::json_value(row[i]);
    arr.push_back(std::move(obj));
  }
  os << arr.dump(2) << '\n';
}

inline void write_table(std::ostream& os, const Table& t, TableFormat f) {
  for (const auto& row : t.rows)
    if (row.size() != t.columns.size()) throw EmitError("table: row width does not match the header");
  if (f == TableFormat::Csv) write_csv(os, t);
  else write_json(os, t);
}

/// Writes the table to `path` (via a temporary sibling, then rename).
/// Throws EmitError for an empty table or any I/O failure.
inline void emit_table(const Table& t, const std::filesystem::path& path, TableFormat f) {
  if (t.rows.empty()) throw EmitError("table: no rows to write");
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw EmitError("cannot open " + tmp.string() + " for writing");
    write_table(os, t, f);
    os.flush();
    if (!os) {
      os.close();
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw EmitError("write failed for " + path.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw EmitError("cannot create " + path.string());
  }
}

}  // namespace relayec
