#include "tscale/text.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "tscale/errors.hpp"

namespace tscale::text {

std::string grouped(std::uint64_t v) {
  std::string digits = std::to_string(v);
  std::string out;
  const std::size_t n = digits.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0 && (n - i) % 3 == 0) out.push_back(',');
    out.push_back(digits[i]);
  }
  return out;
}

std::string grouped_signed(std::int64_t v) {
  if (v >= 0) return grouped(static_cast<std::uint64_t>(v));
  return "-" + grouped(static_cast<std::uint64_t>(-(v + 1)) + 1);
}

namespace {

std::string to_chars_str(double v, std::chars_format fmt) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v, fmt);
  if (ec != std::errc{}) throw ValidationError("cannot format number");
  return std::string(buf, end);
}

}  // namespace

std::string shortest(double v) { return to_chars_str(v, std::chars_format::general); }

std::string scientific(double v) { return to_chars_str(v, std::chars_format::scientific); }

double round1(double v) { return std::round(v * 10.0) / 10.0; }

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_double(std::string_view s, std::string_view what) {
  const std::string t = trim(s);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc{} || ptr != t.data() + t.size() || !std::isfinite(v)) {
    throw ValidationError(fmt::format("{}: '{}' is not a number", what, t));
  }
  return v;
}

std::int64_t parse_int(std::string_view s, std::string_view what) {
  std::string t = trim(s);
  // Underscore digit grouping (7_077_888) is accepted.
  std::erase(t, '_');
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc{} || ptr != t.data() + t.size()) {
    throw ValidationError(fmt::format("{}: '{}' is not an integer", what, t));
  }
  return v;
}

int DelimitedTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return static_cast<int>(i);
  }
  return -1;
}

DelimitedTable parse_delimited(std::string_view text) {
  DelimitedTable table;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  char sep = ',';
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    if (!have_header) {
      sep = t.find('\t') != std::string::npos ? '\t' : ',';
      table.header = split(t, sep);
      have_header = true;
      continue;
    }
    auto cells = split(line, sep);
    if (cells.size() != table.header.size()) {
      throw ValidationError(fmt::format("line {}: expected {} fields, found {}", lineno,
                                        table.header.size(), cells.size()));
    }
    table.rows.push_back({lineno, std::move(cells)});
  }
  if (!have_header) throw ValidationError("delimited input has no header row");
  return table;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open '{}' for reading", path));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(fmt::format("cannot open '{}' for writing", path));
  out << content;
  if (!out) throw IoError(fmt::format("write to '{}' failed", path));
}

}  // namespace tscale::text
