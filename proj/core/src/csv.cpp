#include "cdae/csv.hpp"

#include <charconv>

#include "binary_io.hpp"
#include "cdae/error.hpp"

namespace cdae {

CsvRows parse_csv(std::string_view text) {
  CsvRows rows;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      fields.emplace_back(line.substr(start, comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    rows.push_back(std::move(fields));
  }
  return rows;
}

CsvRows read_csv(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw_error(ErrorCode::MissingFile, path.string());
  return parse_csv(detail::read_text_file(path));
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

double parse_double(std::string_view s, std::string_view what) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw_error(ErrorCode::ParseError, "bad number '" + std::string(s) + "' in " + std::string(what));
  return v;
}

std::size_t parse_size(std::string_view s, std::string_view what) {
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw_error(ErrorCode::ParseError, "bad count '" + std::string(s) + "' in " + std::string(what));
  return v;
}

}  // namespace cdae
