#include <doctest.h>

#include <algorithm>
#include <chrono>
#include <cmath>

#include "chemostat/ensemble.hpp"
#include "chemostat/equilibria.hpp"
#include "chemostat/simulator.hpp"
#include "chemostat/stats.hpp"

using namespace chemostat;

namespace {

ChemostatParams pure_death(double D, double d) {
  ChemostatParams p;
  p.D = D;
  p.birth = BirthLaw::monod(0.0, 1.0);
  p.death = DeathLaw::constant(d);
  return p;
}

std::vector<double> jump_times(const ChemostatParams& p, const HybridState& s, int count, std::uint64_t seed) {
  std::vector<double> out;
  for (int i = 0; i < count; ++i) {
    CounterRng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
    out.push_back(next_jump(p, s, rng, 1e-9, 1e9).t - s.t);
  }
  return out;
}

}  // namespace

TEST_CASE("an empty population has no events and the nutrient relaxes") {
  SimOptions o;
  o.sample_dt = 1.0;
  const auto tr = simulate(ChemostatParams{}, {0, 0.2, 0.0}, 5.0, 1, o);
  CHECK(tr.events.empty());
  REQUIRE(tr.samples.size() == 6);
  for (const auto& s : tr.samples) CHECK(s.y == doctest::Approx(1.0 - 0.8 * std::exp(-s.t)).epsilon(1e-8));
}

TEST_CASE("constant hazard gives exponential jump times") {
  const auto p = pure_death(1.0, 2.0);
  const auto t = jump_times(p, {3, 0.4, 0.0}, 10000, 11);
  const auto ks = stats::ks_test(t, [](double x) { return 1.0 - std::exp(-9.0 * x); });
  CHECK(ks.p_value > 0.01);
}

TEST_CASE("zero birth law never produces a birth and splits washout from death") {
  const auto p = pure_death(1.0, 3.0);
  std::int64_t washouts = 0, deaths = 0;
  for (std::uint64_t s = 0; s < 2000; ++s) {
    const auto tr = simulate(p, {5, 0.5, 0.0}, 100.0, s);
    for (const auto& e : tr.events) {
      CHECK(e.kind != EventKind::Birth);
      washouts += e.kind == EventKind::Washout;
      deaths += e.kind == EventKind::Death;
    }
  }
  const double n = static_cast<double>(washouts + deaths);
  CHECK(n == 10000.0);
  CHECK(std::abs(washouts / n - 0.25) < 5 * std::sqrt(0.25 * 0.75 / n));
}

TEST_CASE("pure-death mean extinction time matches the harmonic sum") {
  const double D = 1.0, d = 0.5;
  const auto p = pure_death(D, d);
  for (std::int64_t k : {1, 4, 10}) {
    double oracle = 0;
    for (std::int64_t j = 1; j <= k; ++j) oracle += 1.0 / (static_cast<double>(j) * (D + d));
    EnsembleOptions eo;
    const auto e = ensemble(p, {k, 0.5, 0.0}, 1e6, 4000, 77, eo);
    const double m = stats::mean(e.extinction_times);
    const double se = stats::stddev(e.extinction_times) / std::sqrt(4000.0);
    CHECK(std::abs(m - oracle) < 3 * se);
  }
}

TEST_CASE("singular death hazard stays finite and matches the survival oracle") {
  ChemostatParams p;
  p.birth = BirthLaw::monod(0.0, 1.0);
  p.death = DeathLaw::singular_power(0.2, 0.3, 0.5);
  p.D = 1.0;
  const double y0 = 0.01;
  // y(t) = 1 - (1 - y0) e^{-t}; cumulative hazard by composite Simpson.
  auto hazard = [&](double t) {
    const int m = 2000;
    auto f = [&](double s) { return p.D + 0.2 + 0.3 * std::pow(1.0 - (1.0 - y0) * std::exp(-s), -0.5); };
    const double h = t / m;
    double acc = f(0) + f(t);
    for (int i = 1; i < m; ++i) acc += f(i * h) * (i % 2 ? 4 : 2);
    return acc * h / 3.0;
  };
  const auto start = std::chrono::steady_clock::now();
  const auto t = jump_times(p, {1, y0, 0.0}, 10000, 5);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  CHECK(secs < 20.0);
  for (double x : t) CHECK(std::isfinite(x));
  const auto ks = stats::ks_test(t, [&](double x) { return 1.0 - std::exp(-hazard(x)); });
  CHECK(ks.p_value > 0.01);
}

TEST_CASE("invariance of N x [0, y*] and of N x [0, y_1] before extinction") {
  const ChemostatParams p;
  EnsembleOptions eo;
  const auto e = ensemble(p, {5, 0.5, 0.0}, 50.0, 2000, 3, eo);
  CHECK(e.y_min_alive >= -1e-9);
  CHECK(e.y_max_alive <= p.y_star + 1e-9);

  const double y1 = equilibrium(p, 1, default_root_tol(p))->y;
  std::vector<HybridState> starts;
  for (int i = 0; i < 2000; ++i) starts.push_back({1 + i % 5, y1 * (i + 1) / 2000.0, 0.0});
  const auto sub = ensemble(p, starts, 50.0, 4, eo);
  CHECK(sub.y_max_alive <= y1 + 1e-9);
}

TEST_CASE("nutrient above y* enters [0, y*] in bounded time") {
  ChemostatParams p;
  p.eta = 0.1;
  const double y0 = 3.0;
  const double enter = (y0 - p.y_star) / consumption(p, p.y_star);
  SimOptions o;
  o.sample_dt = 0.05;
  for (std::uint64_t s = 0; s < 200; ++s) {
    const auto tr = simulate(p, {4, y0, 0.0}, 2 * enter, s, o);
    const double cut = tr.t_absorption ? std::min(*tr.t_absorption, enter) : enter;
    if (tr.t_absorption && *tr.t_absorption < enter) continue;
    for (const auto& smp : tr.samples)
      if (smp.t >= cut) CHECK(smp.y <= p.y_star + 1e-9);
  }
}

TEST_CASE("hard death ends the population when the nutrient runs out") {
  ChemostatParams p;
  p.eta = 0.5;
  p.death = DeathLaw::hard(DeathLaw::constant(0.01));
  p.birth = BirthLaw::monod(0.0, 1.0);
  p.D = 0.01;
  const auto tr = simulate(p, {50, 0.5, 0.0}, 100.0, 9);
  REQUIRE(tr.absorbed);
  CHECK(tr.events.back().kind == EventKind::Extinction);
  CHECK(tr.events.back().y_at == doctest::Approx(0.0));
}

TEST_CASE("sticky zero is entered and left with logged events") {
  ChemostatParams p;
  p.eta = 0.4;
  int hits = 0, leaves = 0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    const auto tr = simulate(p, {8, 0.1, 0.0}, 100.0, s);
    for (const auto& e : tr.events) {
      if (e.kind == EventKind::NutrientHitZero) {
        ++hits;
        CHECK(e.y_at == 0.0);
        CHECK(e.n_after >= 3);
      }
      if (e.kind == EventKind::NutrientLeaveZero) {
        ++leaves;
        CHECK(e.n_after < 3);
      }
    }
  }
  CHECK(hits > 0);
  CHECK(leaves > 0);
}

TEST_CASE("identical seeds give identical trajectories") {
  const ChemostatParams p;
  SimOptions o;
  o.sample_dt = 0.1;
  const auto a = simulate(p, {5, 0.5, 0.0}, 20.0, 123, o);
  const auto b = simulate(p, {5, 0.5, 0.0}, 20.0, 123, o);
  REQUIRE(a.events.size() == b.events.size());
  for (std::size_t i = 0; i < a.events.size(); ++i) {
    CHECK(a.events[i].t == b.events[i].t);
    CHECK(a.events[i].y_at == b.events[i].y_at);
    CHECK(a.events[i].kind == b.events[i].kind);
  }
  REQUIRE(a.samples.size() == b.samples.size());
  for (std::size_t i = 0; i < a.samples.size(); ++i) CHECK(a.samples[i].y == b.samples[i].y);
}

TEST_CASE("ensemble results do not depend on the thread count") {
  const ChemostatParams p;
  EnsembleOptions one, many;
  one.t_grid = many.t_grid = {0.5, 1.0, 2.0, 4.0};
  many.threads = 3;
  const auto a = ensemble(p, {5, 0.5, 0.0}, 30.0, 300, 8, one);
  const auto b = ensemble(p, {5, 0.5, 0.0}, 30.0, 300, 8, many);
  CHECK(a.extinction_times == b.extinction_times);
  CHECK(a.survivors == b.survivors);
  CHECK(a.occupation_time == b.occupation_time);
}

TEST_CASE("a single-path ensemble equals simulate with the derived seed") {
  const ChemostatParams p;
  EnsembleOptions eo;
  eo.keep_trajectories = true;
  const auto e = ensemble(p, {5, 0.5, 0.0}, 30.0, 1, 17, eo);
  const auto tr = simulate(p, {5, 0.5, 0.0}, 30.0, derive_seed(17, 0));
  REQUIRE(e.trajectories.size() == 1);
  CHECK(e.trajectories[0].events.size() == tr.events.size());
  CHECK(e.extinction_times[0] == tr.t_absorption.value_or(INFINITY));
}

TEST_CASE("desk population goes extinct") {
  const ChemostatParams p;
  EnsembleOptions eo;
  eo.t_grid = {20.0};
  const auto e = ensemble(p, {5, 0.5, 0.0}, 20.0, 1000, 21, eo);
  CHECK(e.survivors[0] == 0);
}

TEST_CASE("coupled dominating birth-death count stays above N") {
  const ChemostatParams p;
  for (std::uint64_t s = 0; s < 200; ++s) {
    const auto pts = simulate_domination_coupling(p, {3, 0.4, 0.0}, 10.0, s);
    REQUIRE_FALSE(pts.empty());
    for (const auto& c : pts) CHECK(c.n <= c.m);
  }
}
