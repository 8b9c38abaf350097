#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "chemostat/equilibria.hpp"
#include "chemostat/model.hpp"

namespace chemostat {

class GridError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NoConvergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NegativeMass : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class PreconditionViolated : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DriftConditionFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class GridTop { Y1, YStar };

/// Finite-volume grid on [0, y_max] shared by every population level
/// n = 1..n_max. Every equilibrium y_n inside the domain is a node, so G_n
/// has one sign on each cell.
struct Discretization {
  std::vector<double> nodes;  ///< strictly increasing, nodes.front() == 0
  std::int64_t n_max = 2;
  GridTop top = GridTop::Y1;
  /// Face index of y_n for levels whose root lies in the grid.
  std::map<std::int64_t, std::size_t> root_face;

  std::size_t cells() const { return nodes.size() - 1; }
  double y_max() const { return nodes.back(); }
  double width(std::size_t j) const { return nodes[j + 1] - nodes[j]; }
  double center(std::size_t j) const { return 0.5 * (nodes[j] + nodes[j + 1]); }
  /// Cell index containing y (right-closed at the top).
  std::size_t cell_of(double y) const;
};

/// `cells` uniform cells on [0, y_max] with every y_n (1 <= n <= n_max)
/// inserted as a node; uniform nodes closer than a quarter cell to an
/// inserted root are dropped.
Discretization make_discretization(const ChemostatParams& p, const EquilibriaTable& eq,
                                   std::size_t cells, std::int64_t n_max,
                                   GridTop top = GridTop::Y1);

/// Upwind finite-volume discretisation of the adjoint generator acting on
/// cell masses: d m / dt = A m. Columns sum to minus the killing rate.
struct SpectralOperator {
  ChemostatParams params;
  Discretization disc;
  Eigen::SparseMatrix<double> matrix;
  /// Mass lost per unit time from each unknown (absorption at n = 0, births
  /// out of n_max, flux into a lethal y = 0).
  Eigen::VectorXd killing;
  /// Unknown index of the atom at y = 0 for levels where the nutrient sticks
  /// there and d(0) is finite.
  std::map<std::int64_t, std::size_t> atom_index;

  std::size_t unknowns() const { return static_cast<std::size_t>(matrix.rows()); }
  std::size_t index(std::int64_t n, std::size_t cell) const {
    return static_cast<std::size_t>(n - 1) * disc.cells() + cell;
  }
};

SpectralOperator assemble(const ChemostatParams& p, const Discretization& disc);

struct QsdEstimate {
  std::string method;
  Discretization disc;
  double lambda = 0.0;
  double lambda_stderr = 0.0;
  std::vector<double> kappa;                 ///< kappa[n - 1]
  std::vector<double> kappa_stderr;
  std::vector<std::vector<double>> density;  ///< u_n per cell, [n - 1][cell]
  std::vector<std::vector<double>> density_stderr;
  std::vector<double> atom_at_zero;          ///< mass at y = 0, [n - 1]
  double residual = 0.0;
  int iterations = 0;

  std::int64_t n_max() const { return static_cast<std::int64_t>(kappa.size()); }
  double mass(std::int64_t n, std::size_t cell) const {
    return density[static_cast<std::size_t>(n - 1)][cell] * disc.width(cell);
  }
  /// Stacked cell masses (and atoms) in SpectralOperator layout.
  Eigen::VectorXd to_vector(const SpectralOperator& op) const;
};

struct SolveOptions {
  double tol = 1e-10;
  int max_iter = 2000;
  /// Initial mass vector in operator layout; uniform when empty.
  Eigen::VectorXd start;
};

/// Perron eigenpair A nu = -lambda nu by inverse power iteration with shift
/// 0 and a non-negativity projection, normalised to total mass 1.
QsdEstimate solve(const SpectralOperator& op, const SolveOptions& opt = {});

/// Runs solve() from several starts and keeps the distinct limits (total
/// variation > 1e-6 apart).
std::vector<QsdEstimate> solve_from_starts(const SpectralOperator& op,
                                           std::span<const Eigen::VectorXd> starts,
                                           const SolveOptions& opt = {});

/// Builds an estimate from a raw mass vector in operator layout.
QsdEstimate estimate_from_vector(const SpectralOperator& op, const Eigen::VectorXd& mass);

/// ||A nu + lambda nu||_1 with lambda = killing . nu / sum(nu).
double eigen_residual(const SpectralOperator& op, const Eigen::VectorXd& nu, double* lambda = nullptr);

/// Evolves a mass vector by the truncated sub-Markov semigroup exp(t A)
/// with Crank-Nicolson steps of size dt; the result is not renormalised.
Eigen::VectorXd evolve(const SpectralOperator& op, const Eigen::VectorXd& mass, double t, double dt);

double total_variation(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

/// Equilibria, grid, operator and Perron solve in one call.
struct SpectralRun {
  EquilibriaTable eq;
  SpectralOperator op;
  QsdEstimate est;
  double bound = 0.0;  ///< inf_n n (b(y_n) + D + d(y_n)) over the table
};

SpectralRun run_spectral(const ChemostatParams& p, std::size_t cells, std::int64_t n_max,
                         GridTop top = GridTop::Y1, const SolveOptions& opt = {});

struct AtomProbe {
  std::int64_t n = 0;
  double y_n = 0.0;
  std::vector<double> density_at_root;  ///< per refinement level
  std::vector<double> width_at_root;
  std::vector<double> growth;           ///< per halving of the root cell
};

struct StructuralReport {
  // Positivity of u_n on (0, y_1) away from the y_n cells.
  bool positivity_ok = true;
  std::size_t cells_checked = 0;
  std::size_t nonpositive_cells = 0;
  double min_density = 0.0;
  // No Dirac mass at y_n: density next to y_n grows slower than 1/width.
  bool no_atom_ok = true;
  double max_growth = 0.0;
  std::vector<AtomProbe> atoms;
  // Support within [0, y_1] (and trivially [0, y*]).
  double mass_above_y1 = 0.0;
  bool support_ok = true;
};

/// `refinements[0]` is the base estimate, later entries successively
/// refined grids. Atom probes cover levels whose kappa_n exceeds
/// `kappa_floor` in the base estimate.
StructuralReport structural_checks(std::span<const QsdEstimate> refinements,
                                   const EquilibriaTable& eq, double growth_limit = 1.5,
                                   double support_tol = 1e-10, double kappa_floor = 1e-12);

/// Xi(n, y) from the Lyapunov function exp(a(y) n), a(y) = alpha y + a0.
/// Returns -infinity where d(y) is infinite.
double lyapunov_xi(const ChemostatParams& p, double alpha, double a0, std::int64_t n, double y);

struct DriftCondition {
  double A = 0.0;
  std::int64_t N0 = 0;
};

/// Largest A > 0 and smallest N0 with Xi(n, y) <= -A for every grid y and
/// every grid n > N0. Throws PreconditionViolated when
/// D (exp(-a0) - 1) + D alpha y* >= 0 and DriftConditionFailure when no
/// pair exists up to the n-grid bound.
DriftCondition drift_condition(const ChemostatParams& p, double alpha, double a0,
                               std::span<const std::int64_t> n_grid,
                               std::span<const double> y_grid);

}  // namespace chemostat
