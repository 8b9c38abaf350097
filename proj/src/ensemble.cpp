#include "chemostat/ensemble.hpp"

#include <algorithm>
#include <stdexcept>

#include "chemostat/parallel.hpp"

namespace chemostat {

namespace {

std::vector<double> occupation(const Trajectory& tr, double t_end) {
  std::vector<double> occ;
  std::int64_t n = tr.initial.n;
  double t = tr.initial.t;
  auto add = [&](double until) {
    if (n <= 0) return;
    if (occ.size() <= static_cast<std::size_t>(n)) occ.resize(static_cast<std::size_t>(n) + 1, 0.0);
    occ[static_cast<std::size_t>(n)] += until - t;
  };
  for (const auto& e : tr.events) {
    if (e.kind == EventKind::NutrientHitZero || e.kind == EventKind::NutrientLeaveZero) continue;
    add(e.t);
    t = e.t;
    n = e.n_after;
  }
  if (!tr.absorbed) add(t_end);
  return occ;
}

}  // namespace

EnsembleSummary ensemble(const ChemostatParams& p, std::span<const HybridState> initials,
                         double horizon, std::uint64_t base_seed, const EnsembleOptions& opt) {
  if (initials.empty()) throw std::invalid_argument("ensemble: n_paths must be >= 1");
  const std::size_t count = initials.size();
  SimOptions sim;
  sim.ode_tol = opt.ode_tol;
  sim.sample_dt = opt.sample_dt;

  std::vector<Trajectory> paths(count);
  parallel_for(count, opt.threads, [&](std::size_t i) {
    paths[i] = simulate(p, initials[i], horizon, derive_seed(base_seed, i), sim);
  });

  EnsembleSummary s;
  s.n_paths = static_cast<std::int64_t>(count);
  s.t_grid = opt.t_grid;
  s.survivors.assign(opt.t_grid.size(), 0);
  s.extinction_times.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    const Trajectory& tr = paths[i];
    const double t_abs = tr.absorbed ? *tr.t_absorption - tr.initial.t
                                     : std::numeric_limits<double>::infinity();
    s.extinction_times[i] = t_abs;
    for (std::size_t k = 0; k < opt.t_grid.size(); ++k)
      if (t_abs > opt.t_grid[k]) ++s.survivors[k];
    const auto occ = occupation(tr, tr.initial.t + horizon);
    if (s.occupation_time.size() < occ.size()) s.occupation_time.resize(occ.size(), 0.0);
    for (std::size_t n = 0; n < occ.size(); ++n) s.occupation_time[n] += occ[n];
    s.y_max_alive = std::max(s.y_max_alive, tr.y_max_alive);
    s.y_min_alive = std::min(s.y_min_alive, tr.y_min_alive);
  }
  s.survival.resize(s.survivors.size());
  for (std::size_t k = 0; k < s.survivors.size(); ++k)
    s.survival[k] = static_cast<double>(s.survivors[k]) / static_cast<double>(count);
  if (opt.keep_trajectories) s.trajectories = std::move(paths);
  return s;
}

EnsembleSummary ensemble(const ChemostatParams& p, const HybridState& initial, double horizon,
                         std::int64_t n_paths, std::uint64_t base_seed, const EnsembleOptions& opt) {
  if (n_paths < 1) throw std::invalid_argument("ensemble: n_paths must be >= 1");
  const std::vector<HybridState> initials(static_cast<std::size_t>(n_paths), initial);
  return ensemble(p, initials, horizon, base_seed, opt);
}

}  // namespace chemostat
