#pragma once

#include <cstdint>
#include <string_view>

#include "tscale/errors.hpp"

namespace tscale {

using Count = std::uint64_t;

// Overflow-checked unsigned arithmetic. `what` names the quantity in the
// error message.
inline Count checked_mul(Count a, Count b, std::string_view what = "count") {
  Count r = 0;
  if (__builtin_mul_overflow(a, b, &r)) {
    throw OverflowError(std::string(what) + " overflows 64-bit unsigned range");
  }
  return r;
}

inline Count checked_add(Count a, Count b, std::string_view what = "count") {
  Count r = 0;
  if (__builtin_add_overflow(a, b, &r)) {
    throw OverflowError(std::string(what) + " overflows 64-bit unsigned range");
  }
  return r;
}

}  // namespace tscale
