#pragma once

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

// Tabular results with an ordered metadata block, written as CSV with
// '# key: value' comment lines or as JSON with the metadata as a top-level
// object. All numeric formatting is shortest round-trip, so identical
// configurations produce byte-identical files.

namespace lrb::grid {

using Cell = std::variant<double, long long, std::string>;

struct ResultGrid {
  std::vector<std::pair<std::string, std::string>> meta;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add_meta(std::string key, std::string value) {
    meta.emplace_back(std::move(key), std::move(value));
  }

  std::vector<Cell>& add_row() {
    rows.emplace_back();
    rows.back().reserve(columns.size());
    return rows.back();
  }
};

inline std::string format_double(double v) {
  std::array<char, 32> buf;
  auto [p, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc()) throw std::runtime_error("format_double failed");
  return std::string(buf.data(), p);
}

inline std::string format_cell(const Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) return format_double(*d);
  if (const auto* i = std::get_if<long long>(&c)) return std::to_string(*i);
  return std::get<std::string>(c);
}

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += "\"\"";
    else out += ch;
  }
  out += "\"";
  return out;
}

inline void write_csv(const ResultGrid& g, std::ostream& os) {
  for (const auto& [k, v] : g.meta) os << "# " << k << ": " << v << "\n";
  for (std::size_t i = 0; i < g.columns.size(); ++i)
    os << (i ? "," : "") << csv_escape(g.columns[i]);
  os << "\n";
  for (const auto& row : g.rows) {
    if (row.size() != g.columns.size())
      throw std::logic_error("result grid row width != column count");
    for (std::size_t i = 0; i < row.size(); ++i)
      os << (i ? "," : "") << csv_escape(format_cell(row[i]));
    os << "\n";
  }
}

inline nlohmann::ordered_json to_json(const ResultGrid& g) {
  nlohmann::ordered_json meta = nlohmann::ordered_json::object();
  for (const auto& [k, v] : g.meta) meta[k] = v;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& row : g.rows) {
    if (row.size() != g.columns.size())
      throw std::logic_error("result grid row width != column count");
    nlohmann::ordered_json jr = nlohmann::ordered_json::array();
    for (const Cell& c : row) {
      if (const auto* d = std::get_if<double>(&c)) {
        if (std::isfinite(*d)) jr.push_back(*d);
        else jr.push_back(format_double(*d));  // JSON has no inf/nan literals
      } else if (const auto* i = std::get_if<long long>(&c)) {
        jr.push_back(*i);
      } else {
        jr.push_back(std::get<std::string>(c));
      }
    }
    rows.push_back(std::move(jr));
  }
  nlohmann::ordered_json out;
  out["meta"] = std::move(meta);
  out["columns"] = g.columns;
  out["rows"] = std::move(rows);
  return out;
}

inline void write_json(const ResultGrid& g, std::ostream& os) {
  os << to_json(g).dump(2) << "\n";
}

inline void write_file(const ResultGrid& g, const std::string& path,
                       const std::string& format) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open output file: " + path);
  if (format == "csv") write_csv(g, os);
  else if (format == "json") write_json(g, os);
  else throw std::invalid_argument("format must be csv or json");
  if (!os) throw std::runtime_error("write failed: " + path);
}

}  // namespace lrb::grid
