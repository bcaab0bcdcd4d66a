#include <doctest.h>

#include <cmath>
#include <cstdint>

#include "ifp/quadrature.hpp"
#include "ifp/rng.hpp"

using namespace ifp;

TEST_SUITE("markov") {

// Known-answer vectors from the Random123 distribution.
TEST_CASE("philox4x32-10 known answers") {
  using rng::Counter;
  using rng::Key;
  CHECK(rng::philox4x32_10(Counter{0, 0, 0, 0}, Key{0, 0}) ==
        Counter{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
  CHECK(rng::philox4x32_10(Counter{0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                           Key{0xffffffffu, 0xffffffffu}) ==
        Counter{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
  CHECK(rng::philox4x32_10(Counter{0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                           Key{0xa4093822u, 0x299f31d0u}) ==
        Counter{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("draws are pure functions of their coordinates") {
  const auto a = rng::draw(7, 3, 11, rng::Stream::Return);
  const auto b = rng::draw(7, 3, 11, rng::Stream::Return);
  CHECK(a.uniform == b.uniform);
  CHECK(a.normal == b.normal);
  CHECK(rng::draw(7, 3, 11, rng::Stream::Income).uniform != a.uniform);
  CHECK(rng::draw(8, 3, 11, rng::Stream::Return).uniform != a.uniform);
}

TEST_CASE("uniform and normal moments") {
  const int n = 200000;
  double su = 0, sn = 0, sn2 = 0;
  for (int i = 0; i < n; ++i) {
    const auto d = rng::draw(1, 0, static_cast<std::uint64_t>(i), rng::Stream::Test);
    CHECK_UNARY(d.uniform >= 0.0);
    CHECK_UNARY(d.uniform < 1.0);
    su += d.uniform;
    sn += d.normal;
    sn2 += d.normal * d.normal;
  }
  CHECK(std::abs(su / n - 0.5) < 4.0 * std::sqrt(1.0 / 12.0 / n));
  CHECK(std::abs(sn / n) < 4.0 / std::sqrt(double(n)));
  CHECK(std::abs(sn2 / n - 1.0) < 4.0 * std::sqrt(2.0 / n));
}

TEST_CASE("gauss-hermite integrates normal moments") {
  const auto nodes = gauss_hermite_normal(11);
  REQUIRE(nodes.size() == 11);
  auto moment = [&](int k) {
    double s = 0;
    for (const auto& q : nodes) s += q.weight * std::pow(q.point, k);
    return s;
  };
  CHECK(std::abs(moment(0) - 1.0) < 1e-13);
  CHECK(std::abs(moment(1)) < 1e-13);
  CHECK(std::abs(moment(2) - 1.0) < 1e-12);
  CHECK(std::abs(moment(4) - 3.0) < 1e-11);
  CHECK(std::abs(moment(10) - 945.0) < 1e-8);
  double lognormal = 0;
  for (const auto& q : nodes) lognormal += q.weight * std::exp(0.5 * q.point);
  CHECK(std::abs(lognormal - std::exp(0.125)) < 1e-12);
}

}  // TEST_SUITE
