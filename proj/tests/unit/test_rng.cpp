#include <cmath>
#include <set>
#include <vector>

#include "doctest.h"

#include "gffpin/rng.hpp"
#include "gffpin/stats.hpp"

using namespace gffpin;

TEST_CASE("philox block matches published known answers") {
  CHECK(Philox::block({0, 0, 0, 0}, {0, 0}) ==
        std::array<std::uint32_t, 4>{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
  CHECK(Philox::block({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu}) ==
        std::array<std::uint32_t, 4>{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
  CHECK(Philox::block({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u}) ==
        std::array<std::uint32_t, 4>{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("streams are reproducible and distinct") {
  Philox a(1, 2), b(1, 2), c(1, 3);
  for (int i = 0; i < 100; ++i) {
    const auto x = a(), y = b();
    CHECK(x == y);
  }
  Philox a2(1, 2);
  int same = 0;
  for (int i = 0; i < 100; ++i) same += a2() == c();
  CHECK(same < 3);
}

TEST_CASE("uniform stays in the open unit interval with the right moments") {
  Philox r(7, 0);
  std::vector<double> u(200000);
  for (auto& x : u) {
    x = r.uniform();
    REQUIRE(x > 0.0);
    REQUIRE(x < 1.0);
  }
  CHECK(std::abs(mean_of(u) - 0.5) < 5 * std::sqrt(1.0 / 12 / u.size()));
}

TEST_CASE("normal draws have unit variance and no skew") {
  Philox r(11, 5);
  const std::size_t n = 200000;
  std::vector<double> z(n), z3(n);
  for (std::size_t i = 0; i < n; ++i) {
    z[i] = r.normal();
    z3[i] = z[i] * z[i] * z[i];
  }
  CHECK(std::abs(mean_of(z)) < 5 / std::sqrt(double(n)));
  CHECK(std::abs(sample_sd(z) - 1.0) < 5 * std::sqrt(0.5 / n));
  CHECK(std::abs(mean_of(z3)) < 5 * std::sqrt(15.0 / n));
}

TEST_CASE("stream keys separate every component") {
  const StreamKey k{42, 1, 0, 0};
  std::set<std::uint64_t> ids{k.id(), k.with_replica(1).id(), k.with_replica(2).id(), k.with_purpose("omega").id(),
                              k.with_purpose("field").id(), k.with_experiment(2).id(),
                              k.with_replica(1).with_purpose("omega").id()};
  CHECK(ids.size() == 7);
  CHECK(k.with_purpose("omega").id() == k.with_purpose("omega").id());
  CHECK(hash_tag("a") != hash_tag("b"));
  CHECK(splitmix64(0) != splitmix64(1));
}
