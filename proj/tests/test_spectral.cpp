#include <doctest.h>

#include <cmath>
#include <numbers>

#include "chemostat/equilibria.hpp"
#include "chemostat/qsd_spectral.hpp"

using namespace chemostat;

namespace {

ChemostatParams pure_death(double D, double d) {
  ChemostatParams p;
  p.D = D;
  p.birth = BirthLaw::monod(0.0, 1.0);
  p.death = DeathLaw::constant(d);
  return p;
}

const SpectralRun& desk_run() {
  static const SpectralRun r = run_spectral(ChemostatParams{}, 512, 50);
  return r;
}

}  // namespace

TEST_CASE("pure death: lambda = D + d and all mass at n = 1") {
  const auto p = pure_death(1.0, 0.5);
  for (auto top : {GridTop::Y1, GridTop::YStar}) {
    const auto r = run_spectral(p, 64, 2, top);
    CHECK(std::abs(r.est.lambda - 1.5) < 1e-6);
    CHECK(r.est.kappa[0] == doctest::Approx(1.0));
  }
  const auto one = run_spectral(p, 64, 1, GridTop::YStar);
  CHECK(std::abs(one.est.lambda - 1.5) < 1e-6);
}

TEST_CASE("desk eigenpair: residual, rate bound and normalisation") {
  const auto& r = desk_run();
  CHECK(r.est.residual <= 1e-9);
  CHECK(r.est.lambda > 0.0);
  CHECK(r.est.lambda < r.bound);
  double total = 0;
  for (double k : r.est.kappa) total += k;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  double lambda = 0;
  CHECK(eigen_residual(r.op, r.est.to_vector(r.op), &lambda) <= 1e-9);
  CHECK(lambda == doctest::Approx(r.est.lambda).epsilon(1e-9));
}

TEST_CASE("operator columns sum to minus the killing rate") {
  const auto& op = desk_run().op;
  Eigen::VectorXd ones = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(op.unknowns()));
  const Eigen::VectorXd col = op.matrix.transpose() * ones;
  CHECK((col + op.killing).cwiseAbs().maxCoeff() < 1e-9 * op.killing.cwiseAbs().maxCoeff());
  CHECK(op.killing.minCoeff() >= 0.0);
}

TEST_CASE("grid refinement and a larger truncation move lambda by under 1%") {
  const double base = desk_run().est.lambda;
  const auto fine = run_spectral(ChemostatParams{}, 1024, 55);
  CHECK(std::abs(fine.est.lambda / base - 1.0) < 0.01);
}

TEST_CASE("truncation is stable once the top level carries negligible mass") {
  const auto& r = desk_run();
  CHECK(r.est.kappa.back() < 1e-8);
  const auto wider = run_spectral(ChemostatParams{}, 512, 60);
  CHECK(std::abs(wider.est.lambda / r.est.lambda - 1.0) < 1e-3);
}

TEST_CASE("the renormalised semigroup leaves the eigenvector in place") {
  const auto& r = desk_run();
  const Eigen::VectorXd nu = r.est.to_vector(r.op);
  Eigen::VectorXd out = evolve(r.op, nu, 1.0, 0.01);
  // Unnormalised mass decays like exp(-lambda t).
  CHECK(out.sum() == doctest::Approx(std::exp(-r.est.lambda)).epsilon(1e-4));
  out /= out.sum();
  CHECK(total_variation(out, nu) < 1e-6);
}

TEST_CASE("inverse iteration from different starts finds one limit") {
  const auto& r = desk_run();
  const auto size = static_cast<Eigen::Index>(r.op.unknowns());
  std::vector<Eigen::VectorXd> starts;
  starts.push_back(Eigen::VectorXd::Ones(size));
  Eigen::VectorXd spike = Eigen::VectorXd::Zero(size);
  spike(static_cast<Eigen::Index>(r.op.index(10, 3))) = 1.0;
  starts.push_back(spike);
  const auto limits = solve_from_starts(r.op, starts);
  CHECK(limits.size() == 1);
  CHECK(limits[0].lambda == doctest::Approx(r.est.lambda).epsilon(1e-8));
}

TEST_CASE("density is positive on (0, y_1) and has no mass above y_1") {
  const auto& r = desk_run();
  const auto rep = structural_checks(std::span(&r.est, 1), r.eq);
  CHECK(rep.positivity_ok);
  CHECK(rep.nonpositive_cells == 0);

  const auto wide = run_spectral(ChemostatParams{}, 512, 50, GridTop::YStar);
  const auto rep2 = structural_checks(std::span(&wide.est, 1), wide.eq);
  CHECK(rep2.mass_above_y1 < 1e-10);
  CHECK(std::abs(wide.est.lambda / r.est.lambda - 1.0) < 0.01);
}

TEST_CASE("density next to y_n stays integrable under refinement") {
  // Growth per halving of the y_n cell is 2 for a point mass. The desk
  // density has an integrable power singularity at y_n, so growth sits
  // strictly between 1 and 2.
  std::vector<QsdEstimate> ests;
  std::optional<EquilibriaTable> eq;
  for (std::size_t cells : {512u, 1024u, 2048u}) {
    auto r = run_spectral(ChemostatParams{}, cells, 20);
    eq = r.eq;
    ests.push_back(std::move(r.est));
  }
  const auto rep = structural_checks(ests, *eq, 1.9);
  CHECK(rep.no_atom_ok);
  CHECK(rep.max_growth > 1.0);
  CHECK(rep.max_growth < 1.9);
}

TEST_CASE("upwind transport is first-order consistent") {
  // b = 0 and one level: A m / h approximates -(G u)' - (D + d) u.
  ChemostatParams p = pure_death(1.0, 0.5);
  auto err_at = [&](std::size_t cells) {
    const auto eq = equilibria_table(p, 1, default_root_tol(p));
    const auto disc = make_discretization(p, eq, cells, 1, GridTop::YStar);
    const auto op = assemble(p, disc);
    const double pi = std::numbers::pi;
    Eigen::VectorXd m(static_cast<Eigen::Index>(disc.cells()));
    for (std::size_t j = 0; j < disc.cells(); ++j)
      m(static_cast<Eigen::Index>(j)) =
          (std::cos(pi * disc.nodes[j]) - std::cos(pi * disc.nodes[j + 1])) / pi;
    const Eigen::VectorXd am = op.matrix * m;
    double worst = 0;
    for (std::size_t j = 1; j + 1 < disc.cells(); ++j) {
      const double y = disc.center(j);
      const double u = std::sin(pi * y), du = pi * std::cos(pi * y);
      const double exact = -(-p.D * u + p.D * (1 - y) * du) - 1.5 * u;
      worst = std::max(worst, std::abs(am(static_cast<Eigen::Index>(j)) / disc.width(j) - exact));
    }
    return worst;
  };
  const double e1 = err_at(200), e2 = err_at(400);
  CHECK(e1 < 0.1);
  CHECK(e1 / e2 == doctest::Approx(2.0).epsilon(0.2));
}

TEST_CASE("assembly rejects a grid that misses a root") {
  const ChemostatParams p;
  const auto eq = equilibria_table(p, 3, default_root_tol(p));
  const double y1 = *eq.y(1);
  Discretization bad;
  bad.n_max = 3;
  for (int j = 0; j <= 32; ++j) bad.nodes.push_back(y1 * j / 32.0);
  CHECK_THROWS_AS(assemble(p, bad), GridError);
}

TEST_CASE("singular death is supported through cell averages") {
  ChemostatParams p;
  p.death = DeathLaw::singular_power(0.5, 0.5, 0.5);
  const auto r = run_spectral(p, 256, 30);
  CHECK(r.est.residual < 1e-9);
  CHECK(r.est.lambda < r.bound);
}

TEST_CASE("drift condition holds for the desk model") {
  const ChemostatParams p;
  std::vector<std::int64_t> ns;
  for (std::int64_t n = 1; n <= 200; ++n) ns.push_back(n);
  std::vector<double> ys;
  for (int k = 0; k < 200; ++k) ys.push_back(p.y_star * k / 199.0);
  const double a0 = 1.0, alpha = 0.5 * (1 - std::exp(-a0)) / p.y_star;
  const auto dc = drift_condition(p, alpha, a0, ns, ys);
  CHECK(dc.A > 0.0);
  for (std::int64_t n = dc.N0 + 1; n <= 200; ++n)
    for (double y : ys) CHECK(lyapunov_xi(p, alpha, a0, n, y) <= -dc.A + 1e-12);

  CHECK_THROWS_AS(drift_condition(p, 2.0, a0, ns, ys), PreconditionViolated);
}

TEST_CASE("drift condition degenerates as alpha goes to zero without births") {
  const auto p = pure_death(1.0, 1.0);
  std::vector<std::int64_t> ns{1, 2, 5, 50, 200};
  std::vector<double> ys{0.0, 0.3, 1.0};
  const auto dc = drift_condition(p, 1e-9, 1.0, ns, ys);
  CHECK(dc.N0 <= 1);
  CHECK(dc.A == doctest::Approx(2.0 * (1.0 - std::exp(-1.0))).epsilon(1e-6));
}
