#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace tscale::text {

// 7077888 -> "7,077,888"
std::string grouped(std::uint64_t v);
std::string grouped_signed(std::int64_t v);

// Shortest decimal that parses back to the same double.
std::string shortest(double v);
// Shortest round-trip form in scientific notation, e.g. 1e-04, 2.5e-04.
std::string scientific(double v);

// Half away from zero at one decimal.
double round1(double v);

std::string trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);

// Strict numeric parsing; throws ValidationError naming `what`.
double parse_double(std::string_view s, std::string_view what);
std::int64_t parse_int(std::string_view s, std::string_view what);

// Comma- or tab-separated table with a header row. Blank lines and lines
// starting with '#' are skipped; `line` is the 1-based source line.
struct DelimitedRow {
  std::size_t line = 0;
  std::vector<std::string> cells;
};

struct DelimitedTable {
  std::vector<std::string> header;
  std::vector<DelimitedRow> rows;

  // Index of `name` in header or -1.
  int column(std::string_view name) const;
};

DelimitedTable parse_delimited(std::string_view text);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

}  // namespace tscale::text
