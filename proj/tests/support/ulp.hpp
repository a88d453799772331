#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>

namespace tlts::testing {

/// Distance in units in the last place between two finite doubles of the
/// same sign.
inline std::uint64_t ulp_distance(double a, double b) {
  if (a == b) return 0;
  if (std::signbit(a) != std::signbit(b)) return std::numeric_limits<std::uint64_t>::max();
  std::int64_t ia = 0;
  std::int64_t ib = 0;
  std::memcpy(&ia, &a, sizeof a);
  std::memcpy(&ib, &b, sizeof b);
  return ia > ib ? static_cast<std::uint64_t>(ia - ib) : static_cast<std::uint64_t>(ib - ia);
}

}  // namespace tlts::testing
