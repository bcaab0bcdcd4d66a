#include "ifp/rng.hpp"

#include <cmath>
#include <numbers>

namespace ifp::rng {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi,
                    std::uint32_t& lo) noexcept {
  const std::uint64_t product = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(product >> 32);
  lo = static_cast<std::uint32_t>(product);
}

inline Counter round(const Counter& c, const Key& k) noexcept {
  std::uint32_t hi0, lo0, hi1, lo1;
  mulhilo(kMul0, c[0], hi0, lo0);
  mulhilo(kMul1, c[2], hi1, lo1);
  return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
}

inline double to_unit(std::uint32_t hi, std::uint32_t lo) noexcept {
  const std::uint64_t bits =
      ((static_cast<std::uint64_t>(hi) << 32) | lo) >> 11;
  return static_cast<double>(bits) * 0x1.0p-53;
}

}  // namespace

Counter bits(std::uint64_t seed, std::uint64_t path, std::uint64_t date,
             Stream stream) noexcept {
  const Counter counter{static_cast<std::uint32_t>(date),
                        static_cast<std::uint32_t>(path),
                        static_cast<std::uint32_t>(path >> 32),
                        static_cast<std::uint32_t>(stream) |
                            (static_cast<std::uint32_t>(date >> 32) << 8)};
  const Key key{static_cast<std::uint32_t>(seed),
                static_cast<std::uint32_t>(seed >> 32)};
  return philox4x32_10(counter, key);
}

Counter philox4x32_10(Counter counter, Key key) noexcept {
  for (int r = 0; r < 10; ++r) {
    if (r > 0) {
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    counter = round(counter, key);
  }
  return counter;
}

Innovation draw(std::uint64_t seed, std::uint64_t path, std::uint64_t date,
                Stream stream) noexcept {
  const Counter b = bits(seed, path, date, stream);
  const double u1 = to_unit(b[0], b[1]);
  const double u2 = to_unit(b[2], b[3]);
  // Box-Muller on (0,1] x [0,1).
  const double radius = std::sqrt(-2.0 * std::log1p(-u1));
  return {u1, radius * std::cos(2.0 * std::numbers::pi * u2)};
}

double uniform(std::uint64_t seed, std::uint64_t path, std::uint64_t date,
               Stream stream) noexcept {
  const Counter b = bits(seed, path, date, stream);
  return to_unit(b[0], b[1]);
}

}  // namespace ifp::rng
