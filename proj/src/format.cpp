#include "drivestat/format.hpp"

#include <charconv>

namespace drivestat {

std::string format_g9(double v) {
  if (v == 0.0) v = 0.0;  // drop the sign of negative zero
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 9);
  return {buf, res.ptr};
}

}  // namespace drivestat
