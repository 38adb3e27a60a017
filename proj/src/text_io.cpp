#include "pdc/text_io.hpp"

#include "pdc/error.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

namespace pdc::io {

std::string format_double(double v) {
  std::array<char, 64> buf{};
  // whole numbers print as integers, not 2e+05
  const bool whole = std::isfinite(v) && std::abs(v) < 1e15 && v == std::trunc(v);
  auto [ptr, ec] = whole ? std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::fixed, 0)
                         : std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc{}) {
    throw Error("format_double: conversion failed");
  }
  return std::string(buf.data(), ptr);
}

std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (s.empty()) {
    return std::nullopt;
  }
  // from_chars rejects a leading '+'.
  if (s.front() == '+') {
    s.remove_prefix(1);
  }
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    return std::nullopt;
  }
  return v;
}

std::optional<std::int64_t> parse_int(std::string_view s) {
  s = trim(s);
  if (s.empty()) {
    return std::nullopt;
  }
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    return std::nullopt;
  }
  return v;
}

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) {
    return {};
  }
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      break;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

void KeyValueDoc::set(std::string key, std::string value) {
  for (auto& [k, v] : entries) {
    if (k == key) {
      v = std::move(value);
      return;
    }
  }
  entries.emplace_back(std::move(key), std::move(value));
}

void KeyValueDoc::set(std::string key, double value) { set(std::move(key), format_double(value)); }

const std::string* KeyValueDoc::find(std::string_view key) const {
  for (const auto& [k, v] : entries) {
    if (k == key) {
      return &v;
    }
  }
  return nullptr;
}

std::vector<std::string> KeyValueDoc::all(std::string_view key) const {
  std::vector<std::string> out;
  for (const auto& [k, v] : entries) {
    if (k == key) {
      out.push_back(v);
    }
  }
  return out;
}

double KeyValueDoc::number(std::string_view key) const {
  const auto* v = find(key);
  if (v == nullptr) {
    throw DataError("missing key '" + std::string(key) + "'");
  }
  const auto d = parse_double(*v);
  if (!d) {
    throw DataError("key '" + std::string(key) + "': not a number: '" + *v + "'");
  }
  return *d;
}

double KeyValueDoc::number_or(std::string_view key, double fallback) const {
  return find(key) != nullptr ? number(key) : fallback;
}

KeyValueDoc parse_key_values(std::istream& in, const std::string& source_name) {
  KeyValueDoc doc;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view sv = line;
    if (const auto hash = sv.find('#'); hash != std::string_view::npos) {
      sv = sv.substr(0, hash);
    }
    sv = trim(sv);
    if (sv.empty()) {
      continue;
    }
    const auto eq = sv.find('=');
    if (eq == std::string_view::npos) {
      throw DataError(source_name + ":" + std::to_string(lineno) + ": expected 'key = value'");
    }
    auto key = trim(sv.substr(0, eq));
    auto value = trim(sv.substr(eq + 1));
    if (key.empty()) {
      throw DataError(source_name + ":" + std::to_string(lineno) + ": empty key");
    }
    doc.entries.emplace_back(std::string(key), std::string(value));
  }
  return doc;
}

KeyValueDoc read_key_values(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw DataError("cannot open " + path.string());
  }
  return parse_key_values(in, path.string());
}

void write_key_values(std::ostream& out, const KeyValueDoc& doc) {
  for (const auto& [k, v] : doc.entries) {
    out << k << " = " << v << '\n';
  }
}

void write_key_values(const std::filesystem::path& path, const KeyValueDoc& doc) {
  std::ofstream out(path);
  if (!out) {
    throw DataError("cannot write " + path.string());
  }
  write_key_values(out, doc);
}

std::optional<std::size_t> CsvTable::find_column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) {
      return i;
    }
  }
  return std::nullopt;
}

std::size_t CsvTable::column(std::string_view name) const {
  if (auto c = find_column(name)) {
    return *c;
  }
  throw DataError("missing CSV column '" + std::string(name) + "'");
}

double CsvTable::number(std::size_t row, std::size_t col) const {
  const auto& cell = rows.at(row).at(col);
  const auto v = parse_double(cell);
  if (!v) {
    throw DataError("row " + std::to_string(row + 1) + ", column '" + header.at(col) +
                    "': not a number: '" + cell + "'");
  }
  return *v;
}

CsvTable parse_csv(std::istream& in, const std::string& source_name) {
  CsvTable table;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    auto sv = trim(line);
    if (sv.empty() || sv.front() == '#') {
      continue;
    }
    std::vector<std::string> cells;
    for (auto c : split(sv, ',')) {
      cells.emplace_back(trim(c));
    }
    if (!have_header) {
      table.header = std::move(cells);
      have_header = true;
      continue;
    }
    if (cells.size() != table.header.size()) {
      throw DataError(source_name + ": row " + std::to_string(table.rows.size() + 1) + " has " +
                      std::to_string(cells.size()) + " cells, header has " +
                      std::to_string(table.header.size()));
    }
    table.rows.push_back(std::move(cells));
  }
  if (!have_header) {
    throw DataError(source_name + ": empty CSV (no header row)");
  }
  return table;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw DataError("cannot open " + path.string());
  }
  return parse_csv(in, path.string());
}

} // namespace pdc::io
