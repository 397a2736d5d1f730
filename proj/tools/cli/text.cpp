#include "cli/text.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "nvsense/errors.hpp"

namespace nvsense::cli {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

std::string format_number(std::int64_t v) { return std::to_string(v); }

std::string format_scaled(double si, double unit) {
  const double shown = si * unit;
  if (!std::isfinite(shown)) return format_number(shown);
  // the preimages of si under x -> x / unit sit within a few ulps of si * unit
  double probe = shown;
  for (int k = 0; k < 4; ++k) probe = std::nextafter(probe, -HUGE_VAL);
  std::string best;
  for (int k = 0; k < 9; ++k, probe = std::nextafter(probe, HUGE_VAL)) {
    if (probe / unit != si) continue;
    auto text = format_number(probe);
    if (best.empty() || text.size() < best.size()) best = std::move(text);
  }
  return best.empty() ? format_number(shown) : best;
}

double parse_double(std::string_view text, const std::string& where) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r'))
    text.remove_suffix(1);
  double v = 0.0;
  if (text == "inf") return HUGE_VAL;
  if (text == "-inf") return -HUGE_VAL;
  if (text == "nan") return std::nan("");
  const auto* first = text.data();
  if (!text.empty() && text.front() == '+') ++first;
  const auto res = std::from_chars(first, text.data() + text.size(), v);
  if (text.empty() || res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw ValidationError(where + ": expected a number, got '" + std::string(text) + "'");
  return v;
}

std::int64_t parse_int(std::string_view text, const std::string& where) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r'))
    text.remove_suffix(1);
  std::int64_t v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw ValidationError(where + ": expected an integer, got '" + std::string(text) + "'");
  return v;
}

std::string CsvTable::where(const CsvRow& row, std::size_t column) const {
  std::string out = source + ":" + std::to_string(row.line) + ":" + std::to_string(column + 1);
  if (column < header.size()) out += " (" + header[column] + ")";
  return out;
}

double CsvTable::number(const CsvRow& row, std::size_t column) const {
  return parse_double(row.fields.at(column), where(row, column));
}

std::int64_t CsvTable::integer(const CsvRow& row, std::size_t column) const {
  return parse_int(row.fields.at(column), where(row, column));
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  for (auto& f : out) {
    while (!f.empty() && (f.back() == '\r' || f.back() == ' ')) f.pop_back();
    while (!f.empty() && f.front() == ' ') f.erase(f.begin());
  }
  return out;
}

}  // namespace

CsvTable read_csv(std::istream& in, const std::string& source, bool has_header) {
  CsvTable t;
  t.source = source;
  std::string line;
  std::size_t n = 0;
  bool header_seen = !has_header;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '#') {
      if (t.rows.empty()) t.comments.push_back(line.substr(1));
      continue;
    }
    auto fields = split(line);
    if (!header_seen) {
      t.header = std::move(fields);
      header_seen = true;
      continue;
    }
    const std::size_t width = has_header ? t.header.size()
                                         : (t.rows.empty() ? fields.size() : t.rows.front().fields.size());
    if (fields.size() != width)
      throw ValidationError(source + ":" + std::to_string(n) + ":" + std::to_string(std::min(fields.size(), width) + 1) +
                            ": expected " + std::to_string(width) + " fields, found " +
                            std::to_string(fields.size()));
    t.rows.push_back({n, std::move(fields)});
  }
  if (!header_seen) throw ValidationError(source + ": missing header line");
  return t;
}

CsvTable read_csv_file(const std::string& path, bool has_header) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  return read_csv(in, path, has_header);
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

void require_header(const CsvTable& table, const std::vector<std::string>& expected) {
  if (table.header != expected)
    throw ValidationError(table.source + ": schema mismatch: expected header '" + join(expected, ",") +
                          "', found '" + join(table.header, ",") + "'");
}

std::vector<std::pair<std::string, std::string>> parse_metadata(std::string_view line) {
  std::vector<std::pair<std::string, std::string>> out;
  std::istringstream ss{std::string(line)};
  std::string token;
  while (ss >> token) {
    const auto eq = token.find('=');
    if (eq == std::string::npos) throw ValidationError("metadata token '" + token + "' is not key=value");
    out.emplace_back(token.substr(0, eq), token.substr(eq + 1));
  }
  return out;
}

}  // namespace nvsense::cli
