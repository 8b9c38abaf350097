#include <doctest.h>

#include <cmath>

#include "chemostat/model.hpp"

using namespace chemostat;

namespace {

ChemostatParams desk() { return {}; }

ChemostatParams singular_params() {
  ChemostatParams p;
  p.death = DeathLaw::singular_power(1.0, 1.0, 0.5);
  return p;
}

}  // namespace

TEST_CASE("birth rate examples") {
  const auto p = desk();
  CHECK(birth_rate(p, 2, 1.0) == doctest::Approx(5.0));
  CHECK(birth_rate(p, 0, 0.5) == 0.0);
  CHECK(birth_rate(p, 3, 0.0) == 0.0);
}

TEST_CASE("death rate examples") {
  const auto p = desk();
  CHECK(death_rate(p, 4, 0.3).value() == doctest::Approx(8.0));

  ChemostatParams hard = desk();
  hard.death = DeathLaw::hard(DeathLaw::constant(1.0));
  CHECK(death_rate(hard, 2, 0.0).is_infinite());
  CHECK_FALSE(death_rate(hard, 2, 0.1).is_infinite());
  CHECK_FALSE(death_rate(hard, 0, 0.0).is_infinite());

  CHECK(death_rate(singular_params(), 1, 0.25).value() == doctest::Approx(4.0));
  CHECK(singular_params().death.infinite_at_zero());
}

TEST_CASE("drift examples") {
  const auto p = desk();
  CHECK(drift(p, 0, 1.0) == 0.0);
  const double y1 = (std::sqrt(29.0) - 5.0) / 2.0;
  CHECK(std::abs(drift(p, 1, y1)) < 1e-14);

  ChemostatParams q = desk();
  q.eta = 2.0;
  CHECK(drift_at_zero_plus(q, 1) == doctest::Approx(-1.0));
  CHECK(nutrient_sticks_at_zero(q, 1));
  CHECK_FALSE(nutrient_sticks_at_zero(desk(), 100));
}

TEST_CASE("drift is strictly decreasing on (0, y*] and non-positive above y*") {
  for (const auto& p : {desk(), singular_params()}) {
    for (std::int64_t n = 1; n <= 40; n += 3) {
      double prev = drift(p, n, 1e-6);
      for (int k = 1; k <= 400; ++k) {
        const double y = 1e-6 + k * (p.y_star - 1e-6) / 400;
        const double g = drift(p, n, y);
        CHECK(g < prev);
        prev = g;
      }
    }
    for (std::int64_t n = 0; n <= 20; ++n)
      for (double y : {1.0, 1.2, 2.0, 10.0}) CHECK(drift(p, n, y * p.y_star) <= 0.0);
  }
}

TEST_CASE("rates are monotone in y and linear in n") {
  const auto p = singular_params();
  double pb = -1, pd = 1e300;
  for (int k = 1; k <= 300; ++k) {
    const double y = k / 100.0;
    const double b = birth_rate(p, 1, y);
    const double d = death_rate(p, 1, y).value();
    CHECK(b >= pb);
    CHECK(d <= pd);
    pb = b;
    pd = d;
    CHECK(birth_rate(p, 7, y) == doctest::Approx(7 * b));
    CHECK(death_rate(p, 7, y).value() == doctest::Approx(7 * d));
  }
}

TEST_CASE("tabulated birth law interpolates and is validated") {
  const auto b = BirthLaw::tabulated({0.0, 0.5, 1.0}, {0.0, 2.0, 3.0});
  CHECK(b(0.25) == doctest::Approx(1.0));
  CHECK(b(0.75) == doctest::Approx(2.5));
  CHECK(b(4.0) == doctest::Approx(3.0));
  CHECK(b.sup() == doctest::Approx(3.0));
  CHECK_THROWS_AS(BirthLaw::tabulated({0.0, 0.5, 1.0}, {0.0, 2.0, 1.0}), ValidationError);
  CHECK_THROWS_AS(BirthLaw::tabulated({0.1, 0.5}, {0.0, 2.0}), ValidationError);
  CHECK(BirthLaw::monod(5, 1).positive_slope_at_zero());
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(DeathLaw::singular_power(1.0, 1.0, 1.2), ValidationError);
  CHECK_THROWS_AS(DeathLaw::constant(-1.0), ValidationError);
  ChemostatParams p;
  p.eta = -0.1;
  CHECK_THROWS_AS(p.validate(), ValidationError);
  p = {};
  p.D = 0.0;
  CHECK_THROWS_AS(p.validate(), ValidationError);
  CHECK_NOTHROW(desk().validate());
}

TEST_CASE("consumption includes maintenance only when nutrient is present") {
  ChemostatParams p;
  p.eta = 0.3;
  p.R = 2.0;
  CHECK(consumption(p, 0.0) == 0.0);
  CHECK(consumption(p, 1.0) == doctest::Approx(2.5 / 2.0 + 0.3));
}

TEST_CASE("singular cell average matches the closed-form integral") {
  const auto d = DeathLaw::singular_power(0.5, 2.0, 0.5);
  // Mean of 0.5 + 2 y^(-1/2) on [0, 0.04] is 0.5 + 2 * 2 * 0.2 / 0.04.
  CHECK(d.cell_average(0.0, 0.04) == doctest::Approx(0.5 + 20.0));
  CHECK(d.cell_average(0.01, 0.04) == doctest::Approx(0.5 + 2 * 2 * (0.2 - 0.1) / 0.03));
}
