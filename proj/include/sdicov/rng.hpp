#pragma once

// Portable seeded randomness. The engine is the standard 64-bit Mersenne
// Twister (std::mt19937_64, whose output sequence is fixed by the C++
// standard). The distributions are implemented here rather than taken from
// <random>, whose distribution algorithms differ between standard libraries:
//
//   uniform()  = (next() >> 11) * 2^-53                     in [0, 1)
//   normal()   = sqrt(-2 ln(1 - u1)) * cos(2 pi u2)         one draw per call
//   index(n)   = floor(uniform() * n)
//
// so a given seed produces the same instances on every platform.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <random>

namespace sdicov {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double normal() {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  std::size_t index(std::size_t n) {
    const auto i = static_cast<std::size_t>(uniform() * static_cast<double>(n));
    return i < n ? i : n - 1;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace sdicov
