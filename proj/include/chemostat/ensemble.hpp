#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "chemostat/simulator.hpp"

namespace chemostat {

struct EnsembleOptions {
  double ode_tol = 1e-9;
  /// Survival curve evaluation times (relative to each path's start).
  std::vector<double> t_grid;
  unsigned threads = 1;
  bool keep_trajectories = false;
  std::optional<double> sample_dt;
};

struct EnsembleSummary {
  std::int64_t n_paths = 0;
  std::vector<double> t_grid;
  std::vector<std::int64_t> survivors;  ///< paths with T_0 > t_k
  std::vector<double> survival;         ///< survivors / n_paths
  /// Absorption time per path; +infinity if alive at the horizon.
  std::vector<double> extinction_times;
  /// Total time spent with N = n (index n) before absorption, over all paths.
  std::vector<double> occupation_time;
  double y_max_alive = -std::numeric_limits<double>::infinity();
  double y_min_alive = std::numeric_limits<double>::infinity();
  std::vector<Trajectory> trajectories;
};

/// Independent paths; path i runs simulate() with derive_seed(base_seed, i).
EnsembleSummary ensemble(const ChemostatParams& p, const HybridState& initial, double horizon,
                         std::int64_t n_paths, std::uint64_t base_seed,
                         const EnsembleOptions& opt = {});

/// Same, with one initial state per path.
EnsembleSummary ensemble(const ChemostatParams& p, std::span<const HybridState> initials,
                         double horizon, std::uint64_t base_seed, const EnsembleOptions& opt = {});

}  // namespace chemostat
