#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <set>

#include "switchadj/rng.hpp"

using namespace switchadj;

TEST_CASE("philox4x32-10 known-answer vectors") {
  // Random123 kat_vectors
  CHECK(philox4x32({0, 0, 0, 0}, {0, 0}) ==
        std::array<std::uint32_t, 4>{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(philox4x32({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
        std::array<std::uint32_t, 4>{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(philox4x32({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
        std::array<std::uint32_t, 4>{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("streams are reproducible and independent of consumption order") {
  random_stream a(42, 7), b(42, 7);
  for (int i = 0; i < 100; ++i) CHECK(a() == b());

  random_stream x(42, 1);
  random_stream y(42, 2);
  for (int i = 0; i < 50; ++i) (void)y();
  random_stream x2(42, 1);
  for (int i = 0; i < 20; ++i) CHECK(x() == x2());
}

TEST_CASE("derived keys separate tuples") {
  std::set<std::uint64_t> keys;
  for (std::uint64_t s = 0; s < 4; ++s)
    for (std::uint64_t c = 0; c < 3; ++c)
      for (std::uint64_t r = 0; r < 50; ++r) keys.insert(derive_key(9, {s, c, r}));
  CHECK(keys.size() == 4 * 3 * 50);
  CHECK(derive_key(1, {2, 3}) != derive_key(1, {3, 2}));
}

TEST_CASE("uniform stays inside the open unit interval with the right mean") {
  random_stream s(123, 0);
  double sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = s.uniform();
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK(sum / n == doctest::Approx(0.5).epsilon(0.005));
}

TEST_CASE("beta(5, 10) has mean 1/3") {
  random_stream s(5, 10);
  double sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) sum += s.beta(5.0, 10.0);
  CHECK(std::abs(sum / n - 1.0 / 3.0) < 0.003);
}
