#pragma once

#include <charconv>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace dsinv {

// Locale-independent number formatting. Decimal output uses the shortest
// round-trip form; hex output is bit-exact and used in policy artifacts.

inline std::string format_double(double x) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc()) throw std::runtime_error("format_double failed");
  return std::string(buf, p);
}

inline std::string format_hex_double(double x) {
  char buf[64];
  auto [p, ec] =
      std::to_chars(buf, buf + sizeof buf, x, std::chars_format::hex);
  if (ec != std::errc()) throw std::runtime_error("format_hex_double failed");
  return std::string(buf, p);
}

inline double parse_double(const std::string& s) {
  double x = 0.0;
  const char* b = s.data();
  const char* e = s.data() + s.size();
  std::from_chars_result r{};
  if (s.size() > 1 && (s.find('p') != std::string::npos ||
                       s.find('P') != std::string::npos)) {
    bool neg = *b == '-';
    if (neg) ++b;
    r = std::from_chars(b, e, x, std::chars_format::hex);
    if (neg) x = -x;
  } else {
    r = std::from_chars(b, e, x);
  }
  if (r.ec != std::errc() || r.ptr != e)
    throw std::runtime_error("cannot parse number: '" + s + "'");
  return x;
}

inline long parse_long(const std::string& s) {
  long x = 0;
  auto r = std::from_chars(s.data(), s.data() + s.size(), x);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size())
    throw std::runtime_error("cannot parse integer: '" + s + "'");
  return x;
}

}  // namespace dsinv
