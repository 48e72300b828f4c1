#pragma once

// Internal helpers for the CSV-style artifact formats.

#include <charconv>
#include <cstdint>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "softlspi/errors.hpp"

namespace softlspi::detail {

inline std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\r' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

inline double parse_double(std::string_view text) {
  text = trim(text);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size())
    throw DataError("not a number: '" + std::string(text) + "'");
  return value;
}

template <typename Int>
Int parse_int(std::string_view text) {
  text = trim(text);
  Int value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size())
    throw DataError("not an integer: '" + std::string(text) + "'");
  return value;
}

/// Round-trip exact decimal form of a double.
inline std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

/// Parses '# key=value key=value ...' metadata lines.
inline std::map<std::string, std::string, std::less<>> parse_meta_line(std::string_view line) {
  line = trim(line);
  if (line.empty() || line.front() != '#') throw DataError("missing '#' metadata line");
  line.remove_prefix(1);
  std::map<std::string, std::string, std::less<>> meta;
  for (const auto token : split(trim(line), ' ')) {
    if (token.empty()) continue;
    const auto eq = token.find('=');
    if (eq == std::string_view::npos) throw DataError("bad metadata token '" + std::string(token) + "'");
    meta.emplace(std::string(token.substr(0, eq)), std::string(token.substr(eq + 1)));
  }
  return meta;
}

inline const std::string& require_meta(const std::map<std::string, std::string, std::less<>>& meta,
                                       std::string_view key) {
  const auto it = meta.find(key);
  if (it == meta.end()) throw DataError("metadata key '" + std::string(key) + "' missing");
  return it->second;
}

}  // namespace softlspi::detail
