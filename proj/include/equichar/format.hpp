#pragma once

#include <cmath>
#include <cstdio>
#include <string>

namespace equichar {

/// Formats with 17 significant digits (round-trip exact); negative zero
/// prints as "0".
inline std::string format_g17(double v) {
  if (v == 0.0) return "0";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace equichar
