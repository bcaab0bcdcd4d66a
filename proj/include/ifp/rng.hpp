#pragma once

// Counter-based random numbers. Every draw is a pure function of
// (seed, path, date, stream), so simulations are reproducible bit-for-bit
// regardless of how paths are split across threads.

#include <array>
#include <cstdint>

namespace ifp::rng {

using Counter = std::array<std::uint32_t, 4>;
using Key = std::array<std::uint32_t, 2>;

// Philox4x32 with 10 rounds (Salmon et al., Random123).
Counter philox4x32_10(Counter counter, Key key) noexcept;

// Independent streams. Values are part of the reproducibility contract:
// changing them changes every simulated number.
enum class Stream : std::uint32_t {
  State = 1,
  Discount = 2,
  Return = 3,
  Income = 4,
  Start = 5,
  Oracle = 6,
  Bootstrap = 7,
  Test = 8,
};

// One uniform on [0,1) and one standard normal built from the same block.
// A primitive consumes exactly one of the two.
struct Innovation {
  double uniform;
  double normal;
};

// Raw 128-bit block for (seed, path, date, stream).
Counter bits(std::uint64_t seed, std::uint64_t path, std::uint64_t date,
             Stream stream) noexcept;

Innovation draw(std::uint64_t seed, std::uint64_t path, std::uint64_t date,
                Stream stream) noexcept;

double uniform(std::uint64_t seed, std::uint64_t path, std::uint64_t date,
               Stream stream) noexcept;

}  // namespace ifp::rng
