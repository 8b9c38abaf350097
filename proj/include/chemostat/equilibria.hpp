#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "chemostat/model.hpp"

namespace chemostat {

/// Stationary nutrient level y_n at fixed population n: the root of G_n.
struct Equilibrium {
  std::int64_t n = 0;
  bool exists = false;
  double y = 0.0;         ///< meaningful only when exists
  double residual = 0.0;  ///< G_n(y); at a boundary root, G_n(0+)
  bool at_boundary = false;  ///< y_n == 0 because G_n(0+) == 0 exactly
};

/// Root of G_n(y) = 0 on [0, y*] by bisection to bracket width <= tol.
/// Returns std::nullopt when no root exists (eta > 0 and n > D y* / eta).
std::optional<Equilibrium> equilibrium(const ChemostatParams& p, std::int64_t n, double tol);

/// Default bisection tolerance 1e-12 * y*.
double default_root_tol(const ChemostatParams& p);

struct EquilibriaTable {
  /// One entry per n = 0..n_max (existence flagged per entry).
  std::vector<Equilibrium> entries;
  /// Largest n with a root, or nullopt when every n has one (eta == 0).
  std::optional<std::int64_t> n_max_with_root;
  /// Minimal n with n * eta > D y*, nullopt when eta == 0.
  std::optional<std::int64_t> n0;

  /// Roots in increasing n, only those that exist.
  std::vector<Equilibrium> roots() const;
  /// y_n if it exists in the table.
  std::optional<double> y(std::int64_t n) const;
};

EquilibriaTable equilibria_table(const ChemostatParams& p, std::int64_t n_max, double tol);

/// inf over n = 1..n_max with a root of n (b(y_n) + D + d(y_n)).
double survival_rate_bound(const ChemostatParams& p, const EquilibriaTable& table);

}  // namespace chemostat
