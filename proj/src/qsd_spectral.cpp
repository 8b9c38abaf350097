#include "chemostat/qsd_spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/SparseLU>

namespace chemostat {

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;
using SparseLu = Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>>;

constexpr std::size_t kDenseFallbackLimit = 2000;

Eigen::VectorXd uniform_start(const SpectralOperator& op) {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(op.unknowns()));
  for (std::int64_t n = 1; n <= op.disc.n_max; ++n)
    for (std::size_t j = 0; j < op.disc.cells(); ++j)
      x[static_cast<Eigen::Index>(op.index(n, j))] = op.disc.width(j);
  return x / x.sum();
}

QsdEstimate dense_solve(const SpectralOperator& op) {
  const Eigen::MatrixXd dense(op.matrix);
  Eigen::EigenSolver<Eigen::MatrixXd> es(dense);
  if (es.info() != Eigen::Success) throw NoConvergence("dense eigen-solve failed");
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < es.eigenvalues().size(); ++i)
    if (es.eigenvalues()[i].real() > es.eigenvalues()[best].real()) best = i;
  Eigen::VectorXd v = es.eigenvectors().col(best).real();
  if (v.sum() < 0.0) v = -v;
  const double scale = v.cwiseAbs().maxCoeff();
  if (v.minCoeff() < -1e-8 * scale) throw NegativeMass("dense Perron vector has mixed signs");
  v = v.cwiseMax(0.0);
  QsdEstimate est = estimate_from_vector(op, v / v.sum());
  est.method = "spectral-dense";
  return est;
}

}  // namespace

std::size_t Discretization::cell_of(double y) const {
  if (y <= nodes.front()) return 0;
  if (y >= nodes.back()) return cells() - 1;
  auto it = std::upper_bound(nodes.begin(), nodes.end(), y);
  return static_cast<std::size_t>(std::distance(nodes.begin(), it)) - 1;
}

Discretization make_discretization(const ChemostatParams& p, const EquilibriaTable& eq,
                                   std::size_t cells, std::int64_t n_max, GridTop top) {
  if (cells < 1) throw GridError("grid needs at least one cell");
  if (n_max < 1) throw GridError("n_max must be >= 1");
  double y_max = p.y_star;
  if (top == GridTop::Y1) {
    const auto y1 = eq.y(1);
    if (!y1 || !(*y1 > 0.0)) throw GridError("y_1 does not exist or is 0; use the y* grid top");
    y_max = *y1;
  }
  std::vector<double> roots;
  for (std::int64_t n = 1; n <= n_max; ++n)
    if (auto yn = eq.y(n); yn && *yn > 0.0 && *yn < y_max) roots.push_back(*yn);
  std::sort(roots.begin(), roots.end());

  const double h = y_max / static_cast<double>(cells);
  std::set<double> nodes{0.0, y_max};
  for (std::size_t j = 1; j < cells; ++j) {
    const double y = h * static_cast<double>(j);
    auto it = std::lower_bound(roots.begin(), roots.end(), y);
    bool near = false;
    if (it != roots.end() && *it - y < 0.25 * h) near = true;
    if (it != roots.begin() && y - *std::prev(it) < 0.25 * h) near = true;
    if (!near) nodes.insert(y);
  }
  nodes.insert(roots.begin(), roots.end());

  Discretization d;
  d.nodes.assign(nodes.begin(), nodes.end());
  d.n_max = n_max;
  d.top = top;
  for (std::int64_t n = 1; n <= n_max; ++n) {
    const auto yn = eq.y(n);
    if (!yn || *yn > y_max) continue;
    auto it = std::lower_bound(d.nodes.begin(), d.nodes.end(), *yn);
    if (it != d.nodes.end() && *it == *yn)
      d.root_face[n] = static_cast<std::size_t>(std::distance(d.nodes.begin(), it));
  }
  return d;
}

SpectralOperator assemble(const ChemostatParams& p, const Discretization& disc) {
  const std::size_t m = disc.cells();
  if (m < 1 || disc.nodes.front() != 0.0) throw GridError("grid must start at y = 0");
  for (std::size_t j = 0; j < m; ++j)
    if (!(disc.width(j) > 0.0)) throw GridError("grid cell widths must be > 0");
  if (disc.y_max() > p.y_star * (1.0 + 1e-12)) throw GridError("grid must end at or below y*");

  SpectralOperator op;
  op.params = p;
  op.disc = disc;
  std::size_t count = static_cast<std::size_t>(disc.n_max) * m;
  const bool lethal_zero = p.death.infinite_at_zero();
  for (std::int64_t n = 1; n <= disc.n_max; ++n)
    if (nutrient_sticks_at_zero(p, n) && !lethal_zero) op.atom_index[n] = count++;

  Triplets trip;
  trip.reserve(count * 6);
  Eigen::VectorXd killing = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(count));
  auto add = [&](std::size_t row, std::size_t col, double v) {
    trip.emplace_back(static_cast<int>(row), static_cast<int>(col), v);
  };
  auto kill = [&](std::size_t col, double rate) {
    killing[static_cast<Eigen::Index>(col)] += rate;
  };

  std::vector<double> b_cell(m), d_cell(m);
  for (std::size_t j = 0; j < m; ++j) {
    b_cell[j] = p.birth(disc.center(j));
    d_cell[j] = p.death.cell_average(disc.nodes[j], disc.nodes[j + 1]);
  }

  std::vector<double> g_face(m + 1);
  for (std::int64_t n = 1; n <= disc.n_max; ++n) {
    g_face[0] = drift_at_zero_plus(p, n);
    for (std::size_t f = 1; f <= m; ++f) g_face[f] = drift(p, n, disc.nodes[f]);
    if (auto it = disc.root_face.find(n); it != disc.root_face.end()) g_face[it->second] = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      if (g_face[j] > 0.0 && g_face[j + 1] < 0.0) {
        std::ostringstream os;
        os << "cell [" << disc.nodes[j] << ", " << disc.nodes[j + 1] << "] straddles the root of G_"
           << n << " without a node there";
        throw GridError(os.str());
      }
    }
    if (g_face[m] > 0.0) throw GridError("nutrient flows out through the top of the grid");

    const double nn = static_cast<double>(n);
    // Transport: upwind flux through each face.
    for (std::size_t f = 0; f <= m; ++f) {
      const double g = g_face[f];
      if (g > 0.0 && f > 0) {
        const std::size_t src = op.index(n, f - 1);
        const double r = g / disc.width(f - 1);
        add(src, src, -r);
        add(op.index(n, f), src, r);
      } else if (g < 0.0 && f < m) {
        const std::size_t src = op.index(n, f);
        const double r = -g / disc.width(f);
        add(src, src, -r);
        if (f > 0) {
          add(op.index(n, f - 1), src, r);
        } else if (auto a = op.atom_index.find(n); a != op.atom_index.end()) {
          add(a->second, src, r);
        } else {
          kill(src, r);  // Y hits 0 where d(0) is infinite
        }
      }
    }
    // Births and deaths within each nutrient cell.
    for (std::size_t j = 0; j < m; ++j) {
      const std::size_t src = op.index(n, j);
      const double birth = nn * b_cell[j];
      const double death = nn * (p.D + d_cell[j]);
      add(src, src, -(birth + death));
      if (n < disc.n_max)
        add(op.index(n + 1, j), src, birth);
      else
        kill(src, birth);
      if (n > 1)
        add(op.index(n - 1, j), src, death);
      else
        kill(src, death);
    }
  }
  // Atoms at y = 0 only lose individuals (b(0) = 0).
  for (const auto& [n, idx] : op.atom_index) {
    const double rate = static_cast<double>(n) * (p.D + p.death(0.0).value());
    add(idx, idx, -rate);
    if (n == 1) {
      kill(idx, rate);
    } else if (auto below = op.atom_index.find(n - 1); below != op.atom_index.end()) {
      add(below->second, idx, rate);
    } else {
      add(op.index(n - 1, 0), idx, rate);  // released into the flow from y = 0
    }
  }

  op.matrix.resize(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(count));
  op.matrix.setFromTriplets(trip.begin(), trip.end());
  op.matrix.makeCompressed();
  op.killing = killing;
  return op;
}

Eigen::VectorXd QsdEstimate::to_vector(const SpectralOperator& op) const {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(op.unknowns()));
  for (std::int64_t n = 1; n <= op.disc.n_max; ++n)
    for (std::size_t j = 0; j < op.disc.cells(); ++j)
      x[static_cast<Eigen::Index>(op.index(n, j))] = mass(n, j);
  for (const auto& [n, idx] : op.atom_index)
    x[static_cast<Eigen::Index>(idx)] = atom_at_zero[static_cast<std::size_t>(n - 1)];
  return x;
}

double eigen_residual(const SpectralOperator& op, const Eigen::VectorXd& nu, double* lambda) {
  const double mass = nu.sum();
  const Eigen::VectorXd a_nu = op.matrix * nu;
  const double lam = op.killing.dot(nu) / mass;
  if (lambda) *lambda = lam;
  return (a_nu + lam * nu).lpNorm<1>() / mass;
}

QsdEstimate estimate_from_vector(const SpectralOperator& op, const Eigen::VectorXd& mass) {
  const std::size_t m = op.disc.cells();
  const auto levels = static_cast<std::size_t>(op.disc.n_max);
  QsdEstimate est;
  est.method = "spectral";
  est.disc = op.disc;
  const double total = mass.sum();
  est.kappa.assign(levels, 0.0);
  est.atom_at_zero.assign(levels, 0.0);
  est.density.assign(levels, std::vector<double>(m, 0.0));
  for (std::int64_t n = 1; n <= op.disc.n_max; ++n) {
    const auto k = static_cast<std::size_t>(n - 1);
    for (std::size_t j = 0; j < m; ++j) {
      const double w = mass[static_cast<Eigen::Index>(op.index(n, j))] / total;
      est.density[k][j] = w / op.disc.width(j);
      est.kappa[k] += w;
    }
    if (auto a = op.atom_index.find(n); a != op.atom_index.end()) {
      est.atom_at_zero[k] = mass[static_cast<Eigen::Index>(a->second)] / total;
      est.kappa[k] += est.atom_at_zero[k];
    }
  }
  est.residual = eigen_residual(op, mass / total, &est.lambda);
  return est;
}

QsdEstimate solve(const SpectralOperator& op, const SolveOptions& opt) {
  const auto size = static_cast<Eigen::Index>(op.unknowns());
  Eigen::VectorXd x = opt.start.size() == size ? opt.start : uniform_start(op);
  if (x.minCoeff() < 0.0 || !(x.sum() > 0.0))
    throw std::invalid_argument("solve: start vector must be non-negative with positive mass");
  x /= x.sum();

  SparseLu lu;
  lu.analyzePattern(op.matrix);
  lu.factorize(op.matrix);
  if (lu.info() != Eigen::Success) {
    if (op.unknowns() < kDenseFallbackLimit) return dense_solve(op);
    throw NoConvergence("sparse LU factorisation of the generator failed: " + lu.lastErrorMessage());
  }

  double best_residual = std::numeric_limits<double>::infinity();
  int stall = 0;
  for (int it = 1; it <= opt.max_iter; ++it) {
    // -A^{-1} is entrywise non-negative for this M-matrix structure.
    Eigen::VectorXd z = -lu.solve(x);
    const double scale = z.cwiseAbs().maxCoeff();
    if (!(scale > 0.0) || !std::isfinite(scale)) throw NoConvergence("inverse iteration broke down");
    if (z.minCoeff() < -1e-8 * scale)
      throw NegativeMass("inverse iterate has mixed signs; the grid or truncation is too coarse");
    z = z.cwiseMax(0.0);
    x = z / z.sum();
    double lam = 0.0;
    const double r = eigen_residual(op, x, &lam);
    if (r <= opt.tol) {
      QsdEstimate est = estimate_from_vector(op, x);
      est.iterations = it;
      return est;
    }
    // Stop once round-off dominates: no improvement over many iterations.
    if (r < best_residual * (1.0 - 1e-3)) {
      best_residual = r;
      stall = 0;
    } else if (++stall > 50) {
      break;
    }
  }
  if (op.unknowns() < kDenseFallbackLimit) return dense_solve(op);
  std::ostringstream os;
  os << "inverse iteration did not reach residual " << opt.tol << " (best " << best_residual << ")";
  throw NoConvergence(os.str());
}

std::vector<QsdEstimate> solve_from_starts(const SpectralOperator& op,
                                           std::span<const Eigen::VectorXd> starts,
                                           const SolveOptions& opt) {
  std::vector<QsdEstimate> found;
  std::vector<Eigen::VectorXd> vectors;
  for (const auto& s : starts) {
    SolveOptions o = opt;
    o.start = s;
    QsdEstimate est = solve(op, o);
    Eigen::VectorXd v = est.to_vector(op);
    const bool seen = std::any_of(vectors.begin(), vectors.end(),
                                  [&](const Eigen::VectorXd& w) { return total_variation(v, w) <= 1e-6; });
    if (!seen) {
      vectors.push_back(std::move(v));
      found.push_back(std::move(est));
    }
  }
  return found;
}

Eigen::VectorXd evolve(const SpectralOperator& op, const Eigen::VectorXd& mass, double t, double dt) {
  if (!(t >= 0.0) || !(dt > 0.0)) throw std::invalid_argument("evolve: need t >= 0 and dt > 0");
  const int steps = std::max(1, static_cast<int>(std::ceil(t / dt - 1e-12)));
  const double h = t / steps;
  Eigen::SparseMatrix<double> eye(op.matrix.rows(), op.matrix.cols());
  eye.setIdentity();
  const Eigen::SparseMatrix<double> lhs = eye - 0.5 * h * op.matrix;
  const Eigen::SparseMatrix<double> rhs = eye + 0.5 * h * op.matrix;
  SparseLu lu;
  lu.analyzePattern(lhs);
  lu.factorize(lhs);
  if (lu.info() != Eigen::Success) throw NoConvergence("Crank-Nicolson factorisation failed");
  Eigen::VectorXd x = mass;
  for (int k = 0; k < steps; ++k) x = lu.solve(rhs * x);
  return x;
}

double total_variation(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return 0.5 * (a / a.sum() - b / b.sum()).lpNorm<1>();
}

StructuralReport structural_checks(std::span<const QsdEstimate> refinements,
                                   const EquilibriaTable& eq, double growth_limit,
                                   double support_tol, double kappa_floor) {
  if (refinements.empty()) throw std::invalid_argument("structural_checks: no estimate");
  StructuralReport rep;
  const QsdEstimate& base = refinements.front();
  const Discretization& g = base.disc;
  const auto y1 = eq.y(1);
  const double top = y1 ? *y1 : g.y_max();
  rep.min_density = std::numeric_limits<double>::infinity();

  for (std::int64_t n = 1; n <= base.n_max(); ++n) {
    const auto k = static_cast<std::size_t>(n - 1);
    std::optional<std::size_t> face;
    if (auto it = g.root_face.find(n); it != g.root_face.end()) face = it->second;
    for (std::size_t j = 0; j < g.cells(); ++j) {
      if (g.nodes[j + 1] > top * (1.0 + 1e-12)) {
        rep.mass_above_y1 += base.mass(n, j);
        continue;
      }
      if (face && (j + 1 == *face || j == *face)) continue;
      ++rep.cells_checked;
      const double u = base.density[k][j];
      rep.min_density = std::min(rep.min_density, u);
      if (!(u > 0.0)) ++rep.nonpositive_cells;
    }
  }
  rep.positivity_ok = rep.nonpositive_cells == 0;
  rep.support_ok = rep.mass_above_y1 <= support_tol;

  if (refinements.size() >= 2) {
    for (std::int64_t n = 1; n <= base.n_max(); ++n) {
      if (base.kappa[static_cast<std::size_t>(n - 1)] <= kappa_floor) continue;
      AtomProbe probe;
      probe.n = n;
      bool complete = true;
      for (const QsdEstimate& est : refinements) {
        auto it = est.disc.root_face.find(n);
        if (it == est.disc.root_face.end() || it->second == 0) {
          complete = false;
          break;
        }
        const std::size_t f = it->second;
        probe.y_n = est.disc.nodes[f];
        const auto& u = est.density[static_cast<std::size_t>(n - 1)];
        std::size_t j = f - 1;
        if (f < est.disc.cells() && u[f] > u[j]) j = f;
        probe.density_at_root.push_back(u[j]);
        probe.width_at_root.push_back(est.disc.width(j));
      }
      if (!complete) continue;
      for (std::size_t r = 1; r < probe.density_at_root.size(); ++r) {
        // Growth per halving of the root cell: an atom gives 2, a density
        // singularity |y - y_n|^(-q) gives 2^q.
        const double ratio = probe.density_at_root[r] / probe.density_at_root[r - 1];
        const double shrink = probe.width_at_root[r - 1] / probe.width_at_root[r];
        const double growth =
            shrink > 1.2 ? std::exp(std::log(ratio) * std::log(2.0) / std::log(shrink)) : ratio;
        probe.growth.push_back(growth);
        rep.max_growth = std::max(rep.max_growth, growth);
      }
      rep.atoms.push_back(std::move(probe));
    }
    rep.no_atom_ok = rep.max_growth < growth_limit;
  }
  return rep;
}

double lyapunov_xi(const ChemostatParams& p, double alpha, double a0, std::int64_t n, double y) {
  const Rate d = p.death(y);
  if (d.is_infinite()) return -std::numeric_limits<double>::infinity();
  const double a = alpha * y + a0;
  const double b = p.birth(y);
  return b * (std::exp(a) - 1.0 - alpha * static_cast<double>(n) / p.R) +
         (p.D + d.value()) * (std::exp(-a) - 1.0) + p.D * alpha * (p.y_star - y) -
         (y > 0.0 ? alpha * p.eta : 0.0);
}

DriftCondition drift_condition(const ChemostatParams& p, double alpha, double a0,
                               std::span<const std::int64_t> n_grid,
                               std::span<const double> y_grid) {
  if (!(alpha > 0.0) || !(a0 > 0.0)) throw PreconditionViolated("alpha and a0 must be > 0");
  if (!(p.D * (std::exp(-a0) - 1.0) + p.D * alpha * p.y_star < 0.0))
    throw PreconditionViolated("need D (exp(-a0) - 1) + D alpha y* < 0");
  if (n_grid.empty() || y_grid.empty()) throw std::invalid_argument("drift_condition: empty grid");

  // The n-independent part zeta(y) bounds Xi once exp(a(y*)) - 1 - alpha n / R < 0.
  double zeta_max = -std::numeric_limits<double>::infinity();
  for (double y : y_grid) {
    const Rate d = p.death(y);
    if (d.is_infinite()) continue;
    const double a = alpha * y + a0;
    const double zeta = (p.D + d.value()) * (std::exp(-a) - 1.0) + p.D * alpha * (p.y_star - y) -
                        (y > 0.0 ? alpha * p.eta : 0.0);
    zeta_max = std::max(zeta_max, zeta);
  }
  if (!(zeta_max < 0.0)) throw DriftConditionFailure("zeta(y) is not negative on the grid");
  const double a_zeta = -zeta_max;

  std::vector<std::int64_t> ns(n_grid.begin(), n_grid.end());
  std::sort(ns.begin(), ns.end());
  std::vector<double> sup_xi(ns.size());
  for (std::size_t i = 0; i < ns.size(); ++i) {
    double s = -std::numeric_limits<double>::infinity();
    for (double y : y_grid) s = std::max(s, lyapunov_xi(p, alpha, a0, ns[i], y));
    sup_xi[i] = s;
  }
  std::optional<std::size_t> last_bad;
  for (std::size_t i = ns.size(); i-- > 0;)
    if (sup_xi[i] > -a_zeta) {
      last_bad = i;
      break;
    }
  if (last_bad && *last_bad + 1 == ns.size())
    throw DriftConditionFailure("Xi(n, .) exceeds -A even at the largest grid n");

  DriftCondition out;
  const std::size_t first_good = last_bad ? *last_bad + 1 : 0;
  out.N0 = last_bad ? ns[*last_bad] : std::max<std::int64_t>(ns.front() - 1, 0);
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t i = first_good; i < ns.size(); ++i) worst = std::max(worst, sup_xi[i]);
  out.A = -worst;
  return out;
}

SpectralRun run_spectral(const ChemostatParams& p, std::size_t cells, std::int64_t n_max,
                         GridTop top, const SolveOptions& opt) {
  SpectralRun r;
  r.eq = equilibria_table(p, n_max, default_root_tol(p));
  r.op = assemble(p, make_discretization(p, r.eq, cells, n_max, top));
  r.est = solve(r.op, opt);
  r.bound = survival_rate_bound(p, r.eq);
  return r;
}

}  // namespace chemostat
