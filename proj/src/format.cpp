#include "irforge/format.hpp"

#include <charconv>
#include <cmath>

namespace irforge {

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, value);
  return {buf, res.ptr};
}

}  // namespace irforge
