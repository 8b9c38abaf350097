#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "chemostat/rng.hpp"

using namespace chemostat;

TEST_CASE("philox4x32-10 known-answer vectors") {
  using A4 = std::array<std::uint32_t, 4>;
  using A2 = std::array<std::uint32_t, 2>;
  CHECK(philox4x32(A4{0, 0, 0, 0}, A2{0, 0}) == A4{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(philox4x32(A4{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, A2{0xffffffff, 0xffffffff}) ==
        A4{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(philox4x32(A4{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, A2{0xa4093822, 0x299f31d0}) ==
        A4{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("streams are pure functions of seed, stream and draw index") {
  CounterRng a(42, 7), b(42, 7), c(42, 8), d(43, 7);
  bool differs_stream = false, differs_seed = false;
  for (int k = 0; k < 100; ++k) {
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
    differs_stream |= x != c.next_u64();
    differs_seed |= x != d.next_u64();
  }
  CHECK(differs_stream);
  CHECK(differs_seed);
  CHECK(a.draws() == 100);
}

TEST_CASE("derived seeds do not collide over a large index range") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 100000; ++i) seen.insert(derive_seed(1, i));
  CHECK(seen.size() == 100000);
  CHECK(derive_seed(1, 0) != derive_seed(2, 0));
}

TEST_CASE("uniform, exponential and bounded draws have the right moments") {
  CounterRng r(3);
  const int n = 200000;
  double su = 0, se = 0, se2 = 0;
  double umin = 1, umax = 0;
  std::array<int, 7> bins{};
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    umin = std::min(umin, u);
    umax = std::max(umax, u);
    su += u;
    const double e = r.exponential();
    CHECK(e > 0.0);
    se += e;
    se2 += e * e;
    ++bins[r.below(7)];
  }
  CHECK(umin >= 0.0);
  CHECK(umax < 1.0);
  // Means within 5 standard errors.
  CHECK(std::abs(su / n - 0.5) < 5 * std::sqrt(1.0 / 12.0 / n));
  CHECK(std::abs(se / n - 1.0) < 5 / std::sqrt(static_cast<double>(n)));
  CHECK(std::abs(se2 / n - 2.0) < 5 * std::sqrt(20.0 / n));
  for (int c : bins) CHECK(std::abs(c - n / 7.0) < 5 * std::sqrt(n / 7.0));
  CHECK(CounterRng(9).uniform_pos() > 0.0);
}
