#include "chemostat/equilibria.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace chemostat {

double default_root_tol(const ChemostatParams& p) { return 1e-12 * p.y_star; }

std::optional<Equilibrium> equilibrium(const ChemostatParams& p, std::int64_t n, double tol) {
  if (n < 0) throw std::invalid_argument("equilibrium: n must be >= 0");
  if (!(tol > 0.0)) throw std::invalid_argument("equilibrium: tol must be > 0");
  Equilibrium eq;
  eq.n = n;
  if (n == 0) {
    eq.exists = true;
    eq.y = p.y_star;
    return eq;
  }
  const double g0 = drift_at_zero_plus(p, n);
  if (g0 < 0.0) return std::nullopt;
  eq.exists = true;
  if (g0 == 0.0) {
    eq.y = 0.0;
    eq.at_boundary = true;
    return eq;
  }
  double lo = 0.0, hi = p.y_star;
  if (drift(p, n, hi) >= 0.0) {
    // b~ vanishes on (0, y*] only in the degenerate b == 0, eta == 0 case.
    eq.y = hi;
    eq.residual = drift(p, n, hi);
    return eq;
  }
  // G_n is strictly decreasing on (0, y*]: G_n(lo+) > 0 > G_n(hi).
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (drift(p, n, mid) > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  eq.y = 0.5 * (lo + hi);
  eq.residual = drift(p, n, eq.y);
  return eq;
}

std::vector<Equilibrium> EquilibriaTable::roots() const {
  std::vector<Equilibrium> out;
  for (const auto& e : entries)
    if (e.exists) out.push_back(e);
  return out;
}

std::optional<double> EquilibriaTable::y(std::int64_t n) const {
  if (n < 0 || n >= static_cast<std::int64_t>(entries.size())) return std::nullopt;
  const auto& e = entries[static_cast<std::size_t>(n)];
  if (!e.exists) return std::nullopt;
  return e.y;
}

EquilibriaTable equilibria_table(const ChemostatParams& p, std::int64_t n_max, double tol) {
  if (n_max < 1) throw std::invalid_argument("equilibria_table: n_max must be >= 1");
  EquilibriaTable table;
  table.entries.reserve(static_cast<std::size_t>(n_max + 1));
  for (std::int64_t n = 0; n <= n_max; ++n) {
    if (auto eq = equilibrium(p, n, tol)) {
      table.entries.push_back(*eq);
    } else {
      Equilibrium none;
      none.n = n;
      none.residual = drift_at_zero_plus(p, n);
      table.entries.push_back(none);
    }
  }
  if (p.eta > 0.0) {
    // Count directly on the sign of G_n(0+) to avoid floor() round-off.
    std::int64_t n = static_cast<std::int64_t>(std::floor(p.D * p.y_star / p.eta));
    while (n > 0 && drift_at_zero_plus(p, n) < 0.0) --n;
    while (drift_at_zero_plus(p, n + 1) >= 0.0) ++n;
    table.n_max_with_root = n;
    table.n0 = n + 1;
  }
  return table;
}

double survival_rate_bound(const ChemostatParams& p, const EquilibriaTable& table) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& e : table.entries) {
    if (e.n < 1 || !e.exists) continue;
    const Rate d = p.death(e.y);
    if (d.is_infinite()) continue;
    const double v = static_cast<double>(e.n) * (p.birth(e.y) + p.D + d.value());
    best = std::min(best, v);
  }
  return best;
}

}  // namespace chemostat
