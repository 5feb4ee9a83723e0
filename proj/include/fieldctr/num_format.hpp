#pragma once

#include <charconv>
#include <string>

namespace fieldctr {

// Shortest decimal form that round-trips the exact double.
inline std::string format_compact(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace fieldctr
