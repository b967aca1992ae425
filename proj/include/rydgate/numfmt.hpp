#pragma once

// Locale-independent number text conversion.

#include <charconv>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "rydgate/error.hpp"

namespace rydgate {

/// Shortest text with 17 significant digits, "%.17g" semantics.
inline std::string format_g17(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::general, 17);
  if (ec != std::errc{}) throw std::runtime_error("format_g17: to_chars failed");
  return std::string(buf, end);
}

/// Shortest text that round-trips, for labels and file names.
inline std::string format_short(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc{}) throw std::runtime_error("format_short: to_chars failed");
  return std::string(buf, end);
}

inline std::string_view trim(std::string_view s) {
  constexpr std::string_view ws = " \t\r\n";
  const auto first = s.find_first_not_of(ws);
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(ws);
  return s.substr(first, last - first + 1);
}

inline double parse_double(std::string_view text) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty())
    throw ConfigError("not a decimal number: '" + std::string(text) + "'");
  return value;
}

inline long parse_long(std::string_view text) {
  text = trim(text);
  long value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty())
    throw ConfigError("not an integer: '" + std::string(text) + "'");
  return value;
}

/// Splits on commas; empty fields are dropped.
inline std::vector<std::string> split_list(std::string_view text) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto next = text.find(',', pos);
    const auto field = trim(text.substr(pos, next == std::string_view::npos ? next : next - pos));
    if (!field.empty()) out.emplace_back(field);
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return out;
}

inline std::vector<double> parse_double_list(std::string_view text) {
  std::vector<double> out;
  for (const auto& field : split_list(text)) out.push_back(parse_double(field));
  return out;
}

}  // namespace rydgate
