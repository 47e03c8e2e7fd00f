#pragma once

#include <charconv>
#include <cmath>
#include <string>

namespace gp2s {

/// Shortest round-trip decimal; "inf", "-inf", "nan" for non-finite values.
inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace gp2s
