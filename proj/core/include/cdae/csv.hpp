#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace cdae {

/// Comma-separated rows; no quoting. Blank lines are skipped and a
/// trailing '\r' is stripped.
using CsvRows = std::vector<std::vector<std::string>>;

CsvRows parse_csv(std::string_view text);
CsvRows read_csv(const std::filesystem::path& path);

/// Shortest text that parses back to exactly `v`.
std::string format_double(double v);
/// Whole-string parse; throws ParseError naming `what` on failure.
double parse_double(std::string_view s, std::string_view what);
std::size_t parse_size(std::string_view s, std::string_view what);

}  // namespace cdae
