#pragma once

// Line-oriented CSV helpers shared by the text parsers.

#include <charconv>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "drishti/error.hpp"

namespace drishti::text {

struct Line {
  std::size_t number = 0;  // 1-based
  std::vector<std::string_view> fields;
};

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

/// Non-blank lines that do not start with '#', split on commas.
inline std::vector<Line> data_lines(std::string_view text) {
  std::vector<Line> out;
  std::size_t number = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = text.find('\n', start);
    const auto raw = text.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
    ++number;
    const auto line = trim(raw);
    if (!line.empty() && line.front() != '#') out.push_back(Line{number, split(line, ',')});
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return out;
}

inline std::uint64_t parse_uint(std::string_view s, std::size_t line) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
    throw Error(Errc::MalformedLine, "expected unsigned integer, got '" + std::string(s) + "'", line);
  return v;
}

inline std::int32_t parse_int32(std::string_view s, std::size_t line) {
  std::int32_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
    throw Error(Errc::MalformedLine, "expected integer, got '" + std::string(s) + "'", line);
  return v;
}

inline double parse_double(std::string_view s, std::size_t line) {
  double v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
    throw Error(Errc::MalformedLine, "expected number, got '" + std::string(s) + "'", line);
  return v;
}

}  // namespace drishti::text
