#include <doctest.h>

#include <cmath>

#include "chemostat/equilibria.hpp"
#include "chemostat/ode.hpp"
#include "chemostat/simulator.hpp"

using namespace chemostat;

TEST_CASE("flow without bacteria relaxes exponentially to y*") {
  ChemostatParams p;
  p.D = 0.7;
  p.y_star = 2.0;
  for (double y0 : {0.0, 0.5, 3.0})
    for (double dt : {0.01, 1.0, 5.0}) {
      const double exact = p.y_star - (p.y_star - y0) * std::exp(-p.D * dt);
      CHECK(std::abs(flow(p, 0, y0, dt) - exact) < 1e-8 * p.y_star);
    }
}

TEST_CASE("flow stays pinned at zero when maintenance exceeds inflow") {
  ChemostatParams p;
  p.eta = 0.4;
  CHECK(flow(p, 3, 0.0, 2.0) == 0.0);
  CHECK(flow(p, 10, 0.0, 0.5) == 0.0);
  // From above it reaches zero in finite time and stays there.
  CHECK(flow(p, 10, 0.2, 5.0) == 0.0);
}

TEST_CASE("equilibria are fixed points of the flow") {
  // The tolerance bounds the local error per step; allow a few steps' worth.
  const ChemostatParams p;
  const auto t = equilibria_table(p, 20, default_root_tol(p));
  for (std::int64_t n = 0; n <= 20; ++n) CHECK(std::abs(flow(p, n, *t.y(n), 3.0) - *t.y(n)) < 1e-8);
}

TEST_CASE("dopri5 dense output tracks a closed-form solution") {
  OdeOptions opt;
  opt.rtol = 1e-10;
  opt.atol = 1e-13;
  Dopri5 ode([](double y) { return -y * y; }, opt);
  ode.reset(0.0, 1.0);
  FlowPath path;
  while (ode.t() < 10.0) path.push(ode.step(10.0));
  CHECK(path.t_end() == doctest::Approx(10.0));
  double worst = 0;
  for (int k = 0; k <= 1000; ++k) {
    const double t = 0.01 * k;
    worst = std::max(worst, std::abs(path.at(t) - 1.0 / (1.0 + t)));
  }
  CHECK(worst < 1e-8);

  path.truncate(4.0);
  CHECK(path.t_end() == doctest::Approx(4.0));
  CHECK(path.at(4.0) == doctest::Approx(0.2).epsilon(1e-8));
}
