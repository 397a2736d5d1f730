#pragma once

// Number formatting and CSV tokenizing shared by every file format.

#include <cstdint>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

namespace nvsense::cli {

/// Shortest decimal text that parses back to exactly `v`.
std::string format_number(double v);
std::string format_number(std::int64_t v);

/// Shortest text x such that parse(x) / unit == si, so a value written
/// in display units (us, MHz) reads back to the same SI double.
std::string format_scaled(double si, double unit);

double parse_double(std::string_view text, const std::string& where);
std::int64_t parse_int(std::string_view text, const std::string& where);

struct CsvRow {
  std::size_t line = 0;
  std::vector<std::string> fields;
};

struct CsvTable {
  std::string source;
  std::vector<std::string> comments;  // '#' lines before the header, without the '#'
  std::vector<std::string> header;
  std::vector<CsvRow> rows;

  // "<source>:<line>:<column>"
  std::string where(const CsvRow& row, std::size_t column) const;
  double number(const CsvRow& row, std::size_t column) const;
  std::int64_t integer(const CsvRow& row, std::size_t column) const;
};

/// Read comma-separated values. `has_header` false treats every
/// non-comment line as data.
CsvTable read_csv(std::istream& in, const std::string& source, bool has_header = true);
CsvTable read_csv_file(const std::string& path, bool has_header = true);

void require_header(const CsvTable& table, const std::vector<std::string>& expected);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

/// key=value pairs separated by whitespace, as used in '#' metadata lines.
std::vector<std::pair<std::string, std::string>> parse_metadata(std::string_view line);

}  // namespace nvsense::cli
