#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>

namespace ddmt {

// ceil(x) robust to the few-ulp noise of products like 0.05 * 2000.
inline int ceil_count(double x) {
  return static_cast<int>(std::ceil(x - 1e-9));
}

// Shortest round-trip-exact decimal form of a double.
inline std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  // Prefer a shorter form when it round-trips.
  for (int prec = 1; prec <= 16; ++prec) {
    char shorter[32];
    std::snprintf(shorter, sizeof(shorter), "%.*g", prec, v);
    if (std::strtod(shorter, nullptr) == v) return shorter;
  }
  return buf;
}

}  // namespace ddmt
