#pragma once

// Small helpers for the plain-text formats the toolkit reads and writes:
// `key = value` files and numeric CSV.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace pdc::io {

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double v);

/// Strict full-string parse; nullopt on trailing garbage or empty input.
std::optional<double> parse_double(std::string_view s);
std::optional<std::int64_t> parse_int(std::string_view s);

std::string_view trim(std::string_view s);
std::vector<std::string_view> split(std::string_view s, char sep);

/// Ordered key/value pairs. Repeated keys are kept in order.
struct KeyValueDoc {
  std::vector<std::pair<std::string, std::string>> entries;

  void set(std::string key, std::string value);
  void set(std::string key, double value);
  const std::string* find(std::string_view key) const;
  std::vector<std::string> all(std::string_view key) const;
  double number(std::string_view key) const;
  double number_or(std::string_view key, double fallback) const;
};

/// Parses `key = value` lines. `#` starts a comment; blank lines ignored.
KeyValueDoc parse_key_values(std::istream& in, const std::string& source_name);
KeyValueDoc read_key_values(const std::filesystem::path& path);
void write_key_values(std::ostream& out, const KeyValueDoc& doc);
void write_key_values(const std::filesystem::path& path, const KeyValueDoc& doc);

/// One parsed CSV table with a header row.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of a named column; throws DataError if absent.
  std::size_t column(std::string_view name) const;
  std::optional<std::size_t> find_column(std::string_view name) const;
  double number(std::size_t row, std::size_t col) const;
};

CsvTable read_csv(const std::filesystem::path& path);
CsvTable parse_csv(std::istream& in, const std::string& source_name);

} // namespace pdc::io
