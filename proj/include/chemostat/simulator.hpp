#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "chemostat/model.hpp"
#include "chemostat/ode.hpp"
#include "chemostat/rng.hpp"

namespace chemostat {

struct HybridState {
  std::int64_t n = 0;  ///< population count N(t)
  double y = 0.0;      ///< nutrient concentration Y(t)
  double t = 0.0;
};

enum class EventKind { Birth, Death, Washout, Extinction, NutrientHitZero, NutrientLeaveZero };

std::string_view to_string(EventKind k);

struct TrajectoryEvent {
  double t = 0.0;
  EventKind kind = EventKind::Birth;
  std::int64_t n_after = 0;
  double y_at = 0.0;
};

struct Sample {
  double t = 0.0;
  std::int64_t n = 0;
  double y = 0.0;
};

struct Trajectory {
  ChemostatParams params;
  std::uint64_t seed = 0;
  HybridState initial;
  std::vector<TrajectoryEvent> events;
  std::vector<Sample> samples;
  bool absorbed = false;
  std::optional<double> t_absorption;
  /// Largest / smallest nutrient value visited before absorption (or the
  /// horizon), tracked over every accepted ODE node and jump.
  double y_max_alive = 0.0;
  double y_min_alive = 0.0;
};

struct SimOptions {
  double ode_tol = 1e-9;
  /// Dense (t, n, y) samples every sample_dt when set.
  std::optional<double> sample_dt;
};

/// Y(dt) under the nutrient ODE with the population frozen at n.
double flow(const ChemostatParams& p, std::int64_t n, double y0, double dt, double ode_tol = 1e-9);

enum class JumpKind { Birth, Death, Washout, HardExtinction, None };

struct JumpOutcome {
  double t = 0.0;  ///< jump time, or t_limit when kind == None
  JumpKind kind = JumpKind::None;
  double y = 0.0;  ///< nutrient at t
  /// Time the nutrient reached 0 during this inter-jump interval.
  std::optional<double> t_hit_zero;
  double y_max = 0.0;  ///< range of y over the interval
  double y_min = 0.0;
};

/// Samples the next population jump from `state` (n >= 1).
///
/// The cumulative hazard n (b(Y_s) + D + d(Y_s)) is integrated along the
/// nutrient flow until it exceeds an Exp(1) draw; the jump kind is then
/// chosen proportionally to n b, n D and n d at the jump point. Reaching
/// Y = 0 with an infinite d(0) (hard death, or a singular tail while the
/// nutrient is pinned) ends the population at once. If `path` is given it
/// receives the nutrient trajectory up to the returned time.
JumpOutcome next_jump(const ChemostatParams& p, const HybridState& state, CounterRng& rng,
                      double ode_tol, double t_limit, FlowPath* path = nullptr);

/// Exact path simulation up to extinction or `horizon`.
Trajectory simulate(const ChemostatParams& p, const HybridState& initial, double horizon,
                    std::uint64_t seed, const SimOptions& opt = {});

/// One step of the pathwise coupling: chemostat count N next to a linear
/// birth-death count M with rates frozen at b(y*) and D + d(y*).
struct CoupledPoint {
  double t = 0.0;
  std::int64_t n = 0;
  std::int64_t m = 0;
  double y = 0.0;
};

/// Builds N and the dominating M from one Poisson point measure by thinning
/// (marks at per-individual rate b(y*) + D + d(0) on the labels of M), so
/// N(t) <= M(t) holds pathwise. Requires a finite d(0) and y <= y*.
std::vector<CoupledPoint> simulate_domination_coupling(const ChemostatParams& p,
                                                       const HybridState& initial, double horizon,
                                                       std::uint64_t seed, double ode_tol = 1e-9);

}  // namespace chemostat
