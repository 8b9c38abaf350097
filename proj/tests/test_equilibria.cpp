#include <doctest.h>

#include <cmath>

#include "chemostat/equilibria.hpp"

using namespace chemostat;

namespace {

// Desk roots from (1 - y)(1 + y) = 5 n y.
double desk_root(std::int64_t n) {
  const double a = 5.0 * static_cast<double>(n);
  return (-a + std::sqrt(a * a + 4.0)) / 2.0;
}

}  // namespace

TEST_CASE("root examples") {
  const ChemostatParams p;
  const double tol = default_root_tol(p);
  CHECK(equilibrium(p, 0, tol)->y == p.y_star);
  CHECK(std::abs(equilibrium(p, 1, tol)->y - (std::sqrt(29.0) - 5.0) / 2.0) < 1e-10);
  ChemostatParams q;
  q.eta = 2.0;
  CHECK_FALSE(equilibrium(q, 1, tol).has_value());
}

TEST_CASE("desk roots match the quadratic oracle for every n") {
  const ChemostatParams p;
  const auto t = equilibria_table(p, 200, default_root_tol(p));
  for (std::int64_t n = 1; n <= 200; ++n) CHECK(std::abs(*t.y(n) - desk_root(n)) < 1e-11);
  CHECK_FALSE(t.n0.has_value());
}

TEST_CASE("table is strictly decreasing") {
  const ChemostatParams p;
  const auto t = equilibria_table(p, 3, default_root_tol(p));
  const auto r = t.roots();
  REQUIRE(r.size() == 4);
  for (std::size_t i = 1; i < r.size(); ++i) CHECK(r[i].y < r[i - 1].y);
}

TEST_CASE("maintenance consumption cuts the table off at n0") {
  ChemostatParams p;
  p.eta = 0.4;
  const auto t = equilibria_table(p, 10, default_root_tol(p));
  for (const auto& e : t.entries) CHECK(e.exists == (e.n <= 2));
  REQUIRE(t.n0.has_value());
  CHECK(*t.n0 == 3);
  CHECK(*t.n_max_with_root == 2);
}

TEST_CASE("root at the boundary when n0 = D y* / eta exactly") {
  ChemostatParams p;
  p.eta = 0.5;
  const auto e = equilibrium(p, 2, default_root_tol(p));
  REQUIRE(e.has_value());
  CHECK(e->y == 0.0);
  CHECK(e->at_boundary);
}

TEST_CASE("each root is bracketed by a sign change of G_n") {
  ChemostatParams p;
  p.eta = 0.01;
  p.death = DeathLaw::singular_power(0.5, 0.3, 0.5);
  const double tol = default_root_tol(p);
  const auto t = equilibria_table(p, 60, tol);
  for (const auto& e : t.roots()) {
    if (e.n == 0 || e.at_boundary) continue;
    CHECK(drift(p, e.n, e.y - tol) > 0.0);
    CHECK(drift(p, e.n, e.y + tol) < 0.0);
  }
}

TEST_CASE("n b(y_n) approaches D y* R monotonically") {
  ChemostatParams p;
  p.R = 2.0;
  p.y_star = 3.0;
  double prev = 1e300;
  for (std::int64_t n : {10, 100, 1000}) {
    const auto e = equilibrium(p, n, default_root_tol(p));
    const double err = std::abs(static_cast<double>(n) * p.birth(e->y) / (p.D * p.y_star * p.R) - 1.0);
    CHECK(err < prev);
    prev = err;
  }
  CHECK(prev < 0.01);
}

TEST_CASE("survival rate bound matches the oracle minimum") {
  const ChemostatParams p;
  const auto t = equilibria_table(p, 50, default_root_tol(p));
  double best = 1e300;
  for (std::int64_t n = 1; n <= 50; ++n) {
    const double y = desk_root(n);
    best = std::min(best, static_cast<double>(n) * (5.0 * y / (1.0 + y) + 2.0));
  }
  CHECK(survival_rate_bound(p, t) == doctest::Approx(best).epsilon(1e-10));
}
