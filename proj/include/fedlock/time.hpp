#pragma once

#include <cstdint>

namespace fedlock {

// All time quantities are integer nanoseconds. Analysis arithmetic stays
// integral so fixed-point iterations terminate exactly.
using time_ns = std::int64_t;

constexpr time_ns kMicrosecond = 1'000;
constexpr time_ns kMillisecond = 1'000'000;
constexpr time_ns kSecond = 1'000'000'000;

// Ceiling of a/b for non-negative a, positive b.
constexpr time_ns ceil_div(time_ns a, time_ns b) {
  return (a + b - 1) / b;
}

}  // namespace fedlock
