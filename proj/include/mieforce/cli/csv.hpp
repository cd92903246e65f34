#pragma once

// RFC-4180 CSV (CRLF line ends) with '#' provenance comments above the header.
// Numbers are written with 17 significant digits.

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "mieforce/errors.hpp"

namespace mieforce::cli {

inline std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  std::vector<std::string> comments;  // without the leading '#'

  /// Keeps only `columns`, in that order; empty keeps everything.
  Table select(const std::vector<std::string>& columns) const {
    if (columns.empty()) return *this;
    std::vector<std::size_t> idx;
    for (const auto& c : columns) {
      auto it = std::find(header.begin(), header.end(), c);
      if (it == header.end()) {
        std::string known;
        for (const auto& h : header) known += (known.empty() ? "" : ", ") + h;
        throw ConfigError("unknown output column '" + c + "' (available: " + known + ")");
      }
      idx.push_back(static_cast<std::size_t>(it - header.begin()));
    }
    Table t;
    t.comments = comments;
    for (auto i : idx) t.header.push_back(header[i]);
    for (const auto& r : rows) {
      std::vector<double> row;
      for (auto i : idx) row.push_back(r[i]);
      t.rows.push_back(std::move(row));
    }
    return t;
  }
};

inline std::string quote_field(const std::string& f) {
  if (f.find_first_of(",\"\r\n") == std::string::npos) return f;
  std::string q = "\"";
  for (char c : f) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + '"';
}

inline void write_csv(std::ostream& os, const Table& t) {
  for (const auto& c : t.comments) os << "# " << c << "\r\n";
  for (std::size_t i = 0; i < t.header.size(); ++i) os << (i ? "," : "") << quote_field(t.header[i]);
  os << "\r\n";
  for (const auto& r : t.rows) {
    for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << format_number(r[i]);
    os << "\r\n";
  }
}

}  // namespace mieforce::cli
