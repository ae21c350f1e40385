#include "msforge/units.hpp"

#include "msforge/errors.hpp"

#include <array>
#include <charconv>
#include <cstdio>
#include <utility>

namespace msforge {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

} // namespace

double parse_frequency(std::string_view text) {
  static constexpr std::array<std::pair<std::string_view, double>, 6> units{{
      {"Mrad/s", 1e6},
      {"krad/s", 1e3},
      {"rad/s", 1.0},
      {"MHz", two_pi * 1e6},
      {"kHz", two_pi * 1e3},
      {"Hz", two_pi},
  }};
  const std::string_view s = trim(text);
  for (const auto& [suffix, scale] : units) {
    if (s.size() > suffix.size() && s.substr(s.size() - suffix.size()) == suffix) {
      const std::string_view number = trim(s.substr(0, s.size() - suffix.size()));
      double value = 0.0;
      const auto [ptr, ec] = std::from_chars(number.data(), number.data() + number.size(), value);
      if (ec != std::errc{} || ptr != number.data() + number.size()) {
        throw ConfigError("malformed frequency value '" + std::string(text) + "'");
      }
      return value * scale;
    }
  }
  throw ConfigError("frequency '" + std::string(text) +
                    "' needs an explicit unit suffix (Hz, kHz, MHz, rad/s, krad/s, Mrad/s)");
}

std::string format_frequency(double rad_per_s) {
  std::array<char, 64> buf{};
  std::snprintf(buf.data(), buf.size(), "%.17g rad/s", rad_per_s);
  return buf.data();
}

} // namespace msforge
