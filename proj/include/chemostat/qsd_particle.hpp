#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "chemostat/qsd_spectral.hpp"
#include "chemostat/simulator.hpp"

namespace chemostat {

class AllAbsorbedSimultaneously : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class WindowEmpty : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct FlemingViotOptions {
  double ode_tol = 1e-9;
  /// Defaults to 10 / lambda from a pilot run.
  std::optional<double> burn_in;
  /// Spacing of the snapshots that make up the occupation measure.
  double snapshot_dt = 0.05;
  /// Batches for the batch-means standard errors.
  int batches = 20;
};

struct FlemingViotResult {
  /// Time-averaged empirical law over (burn_in, t_end] on the given grid,
  /// with batch-means standard errors; method "fleming-viot".
  QsdEstimate estimate;
  std::int64_t particles = 0;
  double burn_in = 0.0;
  double t_end = 0.0;
  std::int64_t resamples = 0;  ///< absorptions inside the averaging window
  std::int64_t resamples_total = 0;
  /// Occupation fraction with n > n_max or y above the grid.
  double mass_outside_grid = 0.0;
};

/// Fleming-Viot particle system: m copies of the process run independently;
/// an absorbed copy takes the current state of a uniformly chosen other copy.
/// The absorption rate per particle estimates lambda.
FlemingViotResult fleming_viot(const ChemostatParams& p, std::int64_t m, double t_end,
                               std::span<const HybridState> initial, std::uint64_t seed,
                               const Discretization& grid, const FlemingViotOptions& opt = {});

struct SurvivalCurve {
  std::vector<double> t;
  std::vector<std::int64_t> survivors;
  std::vector<double> S;
  std::int64_t paths = 0;
};

struct ConditionedResult {
  SurvivalCurve survival;
  /// Empirical law of surviving paths at each t_k: counts[k][n - 1][cell].
  std::vector<std::vector<std::vector<std::int64_t>>> counts;
  /// Survivors at t_k falling outside the grid (n > n_max or y > y_max).
  std::vector<std::int64_t> outside;
  std::vector<double> absorption_times;  ///< +infinity if alive at the last t_k
  double lambda = 0.0;         ///< -slope of log S over the fit window
  double lambda_stderr = 0.0;  ///< from the exponential likelihood on the window
  double window_begin = 0.0;
  double window_end = 0.0;
};

/// Independent paths (path i from initial[i % size], seed derive_seed(seed, i))
/// recorded on t_grid. lambda is fitted where S lies in [0.01, 0.5] with at
/// least 100 survivors; throws WindowEmpty when fewer than three grid points
/// qualify. With `fit` false the fit is skipped.
ConditionedResult conditioned_ensemble(const ChemostatParams& p,
                                       std::span<const HybridState> initial,
                                       std::span<const double> t_grid, std::int64_t n_paths,
                                       std::uint64_t seed, const Discretization& grid,
                                       unsigned threads = 1, double ode_tol = 1e-9,
                                       bool fit = true);

/// Draws `count` states from a QSD estimate: (n, cell) by mass, y uniform in
/// the cell, y = 0 for atoms.
std::vector<HybridState> sample_qsd(const QsdEstimate& est, std::int64_t count, std::uint64_t seed);

}  // namespace chemostat
