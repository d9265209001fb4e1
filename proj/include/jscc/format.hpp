#pragma once

#include <cstdio>
#include <string>

namespace jscc {

inline constexpr const char* kVersion = "0.1.0";

/// Number formatting shared by every CSV writer: 12 significant digits.
inline std::string format_number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

}  // namespace jscc
