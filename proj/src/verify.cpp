#include "chemostat/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <optional>
#include <sstream>

#include "chemostat/ensemble.hpp"
#include "chemostat/output.hpp"
#include "chemostat/qsd_particle.hpp"
#include "chemostat/stats.hpp"

namespace chemostat {

std::string_view to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::Pass: return "PASS";
    case CheckStatus::Fail: return "FAIL";
    case CheckStatus::Skip: return "SKIP";
  }
  return "?";
}

bool VerifyReport::all_passed() const {
  return std::none_of(checks.begin(), checks.end(),
                      [](const CheckResult& c) { return c.status == CheckStatus::Fail; });
}

std::string VerifyReport::to_text() const {
  std::ostringstream os;
  for (const auto& c : checks) {
    os << '[' << to_string(c.status) << "] " << std::setw(2) << std::setfill('0') << c.id
       << std::setfill(' ') << ' ' << c.name << "  measured=" << std::setprecision(6) << c.measured
       << " threshold=" << c.threshold << "  (" << std::fixed << std::setprecision(1) << c.seconds
       << "s)" << std::defaultfloat;
    if (!c.detail.empty()) os << "  " << c.detail;
    os << '\n';
  }
  return os.str();
}

namespace {

CheckResult make_check(int id, std::string name, std::string property) {
  CheckResult r;
  r.id = id;
  r.name = std::move(name);
  r.property = std::move(property);
  return r;
}

std::string num(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

bool birth_vanishes(const ChemostatParams& p) { return !(p.birth.sup() > 0.0); }

class Suite {
 public:
  Suite(const RunConfig& c, const VerifyOptions& o) : cfg_(c), p_(c.params), opt_(o) {}

  std::int64_t count(std::int64_t full, std::int64_t floor = 20) const {
    return std::max<std::int64_t>(floor, std::llround(static_cast<double>(full) * opt_.scale));
  }
  std::uint64_t seed(std::uint64_t check) const { return derive_seed(opt_.seed, 1000 + check); }

  const SpectralRun& spectral() {
    if (!spectral_)
      spectral_ = run_spectral(p_, 512, cfg_.spectral.n_max, GridTop::Y1, solve_options());
    return *spectral_;
  }
  SolveOptions solve_options() const {
    SolveOptions s;
    s.tol = cfg_.spectral.tol;
    s.max_iter = cfg_.spectral.max_iter;
    return s;
  }
  HybridState start() const { return {std::max<std::int64_t>(cfg_.simulate.n0, 1), cfg_.simulate.y0, 0.0}; }

  CheckResult invariance() {
    CheckResult r = make_check(1, "invariance", "N x [0, y*] is invariant");
    const HybridState s0{5, std::min(0.5 * p_.y_star, p_.y_star), 0.0};
    EnsembleOptions eo;
    eo.threads = opt_.threads;
    eo.ode_tol = cfg_.run.ode_tol;
    const auto t0 = std::chrono::steady_clock::now();
    const auto ens = ensemble(p_, s0, 50.0, count(10000), seed(1), eo);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const double excess = std::max({ens.y_max_alive - p_.y_star, -ens.y_min_alive, 0.0});
    r.measured = excess;
    r.threshold = 1e-9 * p_.y_star;
    r.status = excess <= r.threshold && secs < 60.0 ? CheckStatus::Pass : CheckStatus::Fail;
    r.detail = "y range [" + num(ens.y_min_alive) + ", " + num(ens.y_max_alive) + "] over " +
               std::to_string(ens.n_paths) + " paths, " + num(secs) + "s of 60s";
    return r;
  }

  CheckResult sub_invariance() {
    CheckResult r = make_check(2, "sub-invariance", "N x [0, y_1] is invariant up to extinction");
    const auto y1 = equilibrium(p_, 1, default_root_tol(p_));
    if (!y1) {
      r.detail = "y_1 does not exist";
      return r;
    }
    const std::int64_t paths = count(10000);
    std::vector<HybridState> starts(static_cast<std::size_t>(paths));
    for (std::size_t i = 0; i < starts.size(); ++i)
      starts[i] = {1 + static_cast<std::int64_t>(i % 5),
                   y1->y * (static_cast<double>(i) + 0.5) / static_cast<double>(paths), 0.0};
    starts.back().y = y1->y;
    EnsembleOptions eo;
    eo.threads = opt_.threads;
    eo.ode_tol = cfg_.run.ode_tol;
    const auto ens = ensemble(p_, starts, 50.0, seed(2), eo);
    r.measured = std::max(ens.y_max_alive - y1->y, 0.0);
    r.threshold = 1e-9;
    r.status = r.measured <= r.threshold ? CheckStatus::Pass : CheckStatus::Fail;
    r.detail = "max y before extinction " + num(ens.y_max_alive) + ", y_1 = " + num(y1->y);
    return r;
  }

  CheckResult extinction() {
    CheckResult r = make_check(3, "almost-sure extinction", "extinction happens almost surely (empirical)");
    const double lambda = spectral().est.lambda;
    const double horizon = 20.0 / lambda;
    EnsembleOptions eo;
    eo.threads = opt_.threads;
    eo.ode_tol = cfg_.run.ode_tol;
    const auto ens = ensemble(p_, start(), horizon, count(1000), seed(3), eo);
    const auto absorbed = std::count_if(ens.extinction_times.begin(), ens.extinction_times.end(),
                                        [](double t) { return std::isfinite(t); });
    r.measured = static_cast<double>(absorbed) / static_cast<double>(ens.n_paths);
    r.threshold = 1.0;
    r.status = r.measured >= 1.0 ? CheckStatus::Pass : CheckStatus::Fail;
    r.detail = std::to_string(absorbed) + "/" + std::to_string(ens.n_paths) + " absorbed by t = " + num(horizon);
    return r;
  }

  CheckResult roots() {
    CheckResult r = make_check(4, "root oracle", "G_n has a unique simple root y_n; n b(y_n) -> D y* R");
    std::vector<std::string> parts;
    bool any = false, ok = true;
    double worst = 0.0;
    if (p_.birth.kind() == BirthLaw::Kind::Monod && p_.birth.b_inf() > 0.0 && p_.D * p_.y_star > p_.eta) {
      // D R y^2 + (D R K + b_inf + eta R - D R y*) y - R K (D y* - eta) = 0.
      const double a = p_.D * p_.R;
      const double b = p_.D * p_.R * p_.birth.K() + p_.birth.b_inf() + p_.eta * p_.R - p_.D * p_.R * p_.y_star;
      const double c = -p_.R * p_.birth.K() * (p_.D * p_.y_star - p_.eta);
      const double q = -0.5 * (b + std::copysign(std::sqrt(b * b - 4.0 * a * c), b));
      const double oracle = b >= 0.0 ? c / q : q / a;
      const auto y1 = equilibrium(p_, 1, default_root_tol(p_));
      const double err = y1 ? std::abs(y1->y - oracle) : std::numeric_limits<double>::infinity();
      any = true;
      ok = ok && err <= 1e-10;
      worst = std::max(worst, err / 1e-10);
      parts.push_back("|y_1 - quadratic root| = " + num(err) + " (tol 1e-10)");
    } else {
      parts.push_back("y_1 oracle needs a Monod law with D y* > eta");
    }
    if (p_.eta == 0.0 && !birth_vanishes(p_)) {
      const auto y = equilibrium(p_, 1000, default_root_tol(p_) * 1e-3);
      const double target = p_.D * p_.y_star * p_.R;
      const double rel = y ? std::abs(1000.0 * p_.birth(y->y) / target - 1.0) : 1.0;
      any = true;
      ok = ok && rel <= 0.01;
      worst = std::max(worst, rel / 0.01);
      parts.push_back("|1000 b(y_1000) / (D y* R) - 1| = " + num(rel) + " (tol 0.01)");
    } else {
      parts.push_back("asymptotics need eta = 0 and b > 0");
    }
    r.measured = worst;
    r.threshold = 1.0;
    r.status = !any ? CheckStatus::Skip : ok ? CheckStatus::Pass : CheckStatus::Fail;
    r.detail = parts[0] + "; " + parts[1];
    return r;
  }

  CheckResult pure_death() {
    CheckResult r = make_check(5, "pure-death oracle", "b = 0 gives P(T_0 > t) = exp(-(D + d) t) from n = 1");
    ChemostatParams q = p_;
    q.birth = BirthLaw::monod(0.0, p_.birth.kind() == BirthLaw::Kind::Monod ? p_.birth.K() : 1.0);
    const Rate d_top = p_.death(p_.y_star);
    q.death = DeathLaw::constant(d_top.value());
    const double rate = q.D + d_top.value();
    const SpectralRun sr = run_spectral(q, 64, 2, GridTop::Y1, solve_options());
    const double lam_err = std::abs(sr.est.lambda - rate);

    EnsembleOptions eo;
    eo.threads = opt_.threads;
    eo.ode_tol = cfg_.run.ode_tol;
    const double y0 = std::min(cfg_.simulate.y0, q.y_star);
    const auto ens = ensemble(q, HybridState{1, y0, 0.0}, 60.0 / rate, count(10000), seed(5), eo);
    std::vector<double> times;
    for (double t : ens.extinction_times)
      if (std::isfinite(t)) times.push_back(t);
    const auto ks = stats::ks_test(times, [rate](double t) { return 1.0 - std::exp(-rate * t); });
    r.measured = lam_err;
    r.threshold = 1e-6;
    r.status = lam_err <= 1e-6 && ks.p_value >= 0.01 && times.size() == ens.extinction_times.size()
                   ? CheckStatus::Pass
                   : CheckStatus::Fail;
    r.detail = "spectral lambda " + num(sr.est.lambda) + " vs D + d = " + num(rate) + "; KS D = " +
               num(ks.statistic) + ", p = " + num(ks.p_value) + " (level 0.01, " +
               std::to_string(times.size()) + " paths)";
    return r;
  }

  CheckResult two_methods() {
    CheckResult r = make_check(6, "two-method lambda", "spectral and Monte Carlo survival rates agree");
    const auto t0 = std::chrono::steady_clock::now();
    const SpectralRun& sr = spectral();
    const HybridState init = start();
    FlemingViotOptions fo;
    fo.ode_tol = cfg_.run.ode_tol;
    fo.burn_in = cfg_.particle.burn_in;
    fo.snapshot_dt = cfg_.particle.snapshot_dt;
    fo.batches = cfg_.particle.batches;
    const std::vector<HybridState> inits{init};
    const auto fv = fleming_viot(p_, count(cfg_.particle.particles, 2), cfg_.particle.t_end, inits,
                                 seed(6), sr.op.disc, fo);
    std::vector<double> grid;
    for (double t = 0.0; t <= cfg_.particle.ensemble_horizon + 1e-12; t += cfg_.particle.ensemble_dt)
      grid.push_back(t);
    const auto ce = conditioned_ensemble(p_, inits, grid, count(cfg_.particle.paths), derive_seed(seed(6), 1),
                                         sr.op.disc, opt_.threads, cfg_.run.ode_tol);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    struct Est {
      double v, se;
    };
    const Est e[3] = {{sr.est.lambda, 0.0}, {fv.estimate.lambda, fv.estimate.lambda_stderr}, {ce.lambda, ce.lambda_stderr}};
    bool ok = secs < 600.0;
    double worst = 0.0;
    for (int i = 0; i < 3; ++i)
      for (int j = i + 1; j < 3; ++j) {
        const double diff = std::abs(e[i].v - e[j].v);
        const double allowed = std::max(0.05 * std::max(e[i].v, e[j].v), 3.0 * std::hypot(e[i].se, e[j].se));
        worst = std::max(worst, diff / allowed);
        ok = ok && diff <= allowed;
      }
    r.measured = worst;
    r.threshold = 1.0;
    r.status = ok ? CheckStatus::Pass : CheckStatus::Fail;
    r.detail = "spectral " + num(sr.est.lambda) + ", Fleming-Viot " + num(fv.estimate.lambda) + " +- " +
               num(fv.estimate.lambda_stderr) + ", conditioned ensemble " + num(ce.lambda) + " +- " +
               num(ce.lambda_stderr) + "; measured = max |diff| / allowed; " + num(secs) + "s of 600s";
    return r;
  }

  CheckResult rate_bound() {
    CheckResult r = make_check(7, "rate bound", "lambda < inf_n n (b(y_n) + D + d(y_n))");
    const SpectralRun& sr = spectral();
    r.measured = sr.est.lambda;
    r.threshold = sr.bound;
    if (birth_vanishes(p_)) {
      r.detail = "with b = 0 the bound is attained (lambda = D + d)";
      return r;
    }
    r.status = sr.est.lambda < sr.bound ? CheckStatus::Pass : CheckStatus::Fail;
    r.detail = "margin " + num(sr.bound - sr.est.lambda);
    return r;
  }

  CheckResult stationarity() {
    CheckResult r = make_check(8, "stationarity", "P_nu(Z(t) in . | T_0 > t) = nu");
    const SpectralRun& sr = spectral();
    const Eigen::VectorXd nu = sr.est.to_vector(sr.op);
    const Eigen::VectorXd moved = evolve(sr.op, nu, 1.0, 0.01);
    const double tv = total_variation(nu, moved);

    // Monte Carlo: coarse (n, y) bins of the law at t = 1 given survival.
    const auto starts = sample_qsd(sr.est, count(10000), seed(8));
    const std::vector<double> grid{1.0};
    const auto ce = conditioned_ensemble(p_, starts, grid, static_cast<std::int64_t>(starts.size()),
                                         derive_seed(seed(8), 1), sr.op.disc, opt_.threads,
                                         cfg_.run.ode_tol, false);
    const Discretization& g = sr.op.disc;
    constexpr int kLevels = 4, kYBins = 4;
    auto bin_of = [&](std::int64_t n, double y) {
      const int nb = static_cast<int>(std::min<std::int64_t>(n, kLevels)) - 1;
      const int yb = std::min(kYBins - 1, static_cast<int>(y / g.y_max() * kYBins));
      return nb * kYBins + yb;
    };
    std::vector<double> expect(kLevels * kYBins, 0.0), seen(kLevels * kYBins, 0.0);
    for (std::int64_t n = 1; n <= sr.est.n_max(); ++n) {
      expect[static_cast<std::size_t>(bin_of(n, 0.0))] += sr.est.atom_at_zero[static_cast<std::size_t>(n - 1)];
      for (std::size_t j = 0; j < g.cells(); ++j)
        expect[static_cast<std::size_t>(bin_of(n, g.center(j)))] += sr.est.mass(n, j);
    }
    const double survivors = static_cast<double>(ce.survival.survivors[0]);
    for (std::int64_t n = 1; n <= g.n_max; ++n)
      for (std::size_t j = 0; j < g.cells(); ++j)
        seen[static_cast<std::size_t>(bin_of(n, g.center(j)))] +=
            static_cast<double>(ce.counts[0][static_cast<std::size_t>(n - 1)][j]);
    double max_z = 0.0;
    int bad = 0;
    for (std::size_t b = 0; b < expect.size(); ++b) {
      const double pb = expect[b];
      const double obs = seen[b] / survivors;
      const double se = std::sqrt(std::max(pb * (1.0 - pb), 0.0) / survivors);
      const double diff = std::abs(obs - pb);
      if (diff > 3.0 * se && diff > 1e-12) ++bad;
      if (se > 0.0) max_z = std::max(max_z, diff / se);
    }
    r.measured = tv;
    r.threshold = 1e-6;
    r.status = tv < 1e-6 && bad == 0 ? CheckStatus::Pass : CheckStatus::Fail;
    r.detail = "TV after t = 1: " + num(tv) + "; Monte Carlo " + std::to_string(static_cast<long long>(survivors)) +
               " survivors, max |z| over 16 bins " + num(max_z) + " (limit 3), bins outside: " + std::to_string(bad);
    return r;
  }

  CheckResult exponential_absorption() {
    CheckResult r = make_check(9, "exponential absorption", "P_nu(T_0 > t) = exp(-lambda t)");
    const SpectralRun& sr = spectral();
    const double lambda = sr.est.lambda;
    const auto starts = sample_qsd(sr.est, count(10000), seed(9));
    EnsembleOptions eo;
    eo.threads = opt_.threads;
    eo.ode_tol = cfg_.run.ode_tol;
    const auto ens = ensemble(p_, starts, 40.0 / lambda, seed(9), eo);
    std::vector<double> times;
    for (double t : ens.extinction_times)
      if (std::isfinite(t)) times.push_back(t);
    const auto ks = stats::ks_test(times, [lambda](double t) { return 1.0 - std::exp(-lambda * t); });
    r.measured = ks.p_value;
    r.threshold = 0.01;
    r.status = ks.p_value >= 0.01 && times.size() == starts.size() ? CheckStatus::Pass : CheckStatus::Fail;
    r.detail = "KS D = " + num(ks.statistic) + " over " + std::to_string(times.size()) +
               " absorption times, mean " + num(stats::mean(times)) + " vs 1/lambda = " + num(1.0 / lambda);
    return r;
  }

  CheckResult density_structure() {
    CheckResult r = make_check(10, "density structure", "u_n > 0 on (0, y_1) off y_n; no Dirac mass at y_n");
    if (birth_vanishes(p_)) {
      r.detail = "with b = 0 the QSD is a point mass at (1, y_1)";
      return r;
    }
    std::vector<QsdEstimate> ests{spectral().est};
    for (std::size_t cells : {std::size_t{1024}, std::size_t{2048}})
      ests.push_back(run_spectral(p_, cells, cfg_.spectral.n_max, GridTop::Y1, solve_options()).est);
    const StructuralReport rep = structural_checks(ests, spectral().eq);
    const SpectralRun top = run_spectral(p_, 512, cfg_.spectral.n_max, GridTop::YStar, solve_options());
    const double above = structural_checks(std::span<const QsdEstimate>(&top.est, 1), top.eq).mass_above_y1;

    std::int64_t worst_n = 0;
    for (const auto& a : rep.atoms)
      for (double gr : a.growth)
        if (gr == rep.max_growth) worst_n = a.n;
    r.measured = rep.max_growth;
    r.threshold = 1.5;
    r.status = rep.positivity_ok && rep.no_atom_ok && above <= 1e-10 ? CheckStatus::Pass : CheckStatus::Fail;
    r.detail = "positive on " + std::to_string(rep.cells_checked - rep.nonpositive_cells) + "/" +
               std::to_string(rep.cells_checked) + " cells (min u " + num(rep.min_density) +
               "); density growth per halving of the y_n cell, worst at n = " + std::to_string(worst_n) +
               "; mass above y_1 on the [0, y*] grid " + num(above);
    return r;
  }

  CheckResult drift() {
    CheckResult r = make_check(11, "drift condition", "Xi(n, y) <= -A for n > N0");
    const double a0 = 1.0;
    const double alpha = 0.5 * (1.0 - std::exp(-a0)) / p_.y_star;
    std::vector<std::int64_t> ns(200);
    std::vector<double> ys(200);
    for (std::size_t i = 0; i < 200; ++i) {
      ns[i] = static_cast<std::int64_t>(i) + 1;
      ys[i] = p_.y_star * static_cast<double>(i) / 199.0;
    }
    const DriftCondition dc = drift_condition(p_, alpha, a0, ns, ys);
    double worst = -std::numeric_limits<double>::infinity();
    for (auto n : ns)
      if (n > dc.N0)
        for (double y : ys) worst = std::max(worst, lyapunov_xi(p_, alpha, a0, n, y));
    r.measured = worst;
    r.threshold = -dc.A;
    r.status = dc.A > 0.0 && worst <= -dc.A * (1.0 - 1e-12) ? CheckStatus::Pass : CheckStatus::Fail;
    r.detail = "alpha = " + num(alpha) + ", a0 = 1: A = " + num(dc.A) + ", N0 = " + std::to_string(dc.N0) +
               "; max Xi over the 200 x 200 grid with n > N0 is the measured value";
    return r;
  }

  CheckResult determinism() {
    CheckResult r = make_check(12, "determinism", "same config and seed give byte-identical output");
    auto render = [&](unsigned threads) {
      std::ostringstream os;
      EnsembleOptions eo;
      eo.threads = threads;
      eo.ode_tol = cfg_.run.ode_tol;
      eo.keep_trajectories = true;
      eo.sample_dt = 0.25;
      for (double t = 0.0; t <= 5.0; t += 0.5) eo.t_grid.push_back(t);
      const auto ens = ensemble(p_, start(), 5.0, count(200), seed(12), eo);
      write_events_csv(os, ens.trajectories);
      write_samples_csv(os, ens.trajectories);
      write_survival_csv(os, ens.t_grid, ens.survivors, ens.n_paths);
      FlemingViotOptions fo;
      fo.burn_in = 1.0;
      const std::vector<HybridState> inits{start()};
      const auto fv = fleming_viot(p_, count(200, 2), 3.0, inits, seed(12), spectral().op.disc, fo);
      write_density_csv(os, fv.estimate);
      write_density_csv(os, spectral().est);
      return os.str();
    };
    const std::string a = render(1), b = render(1), c = render(std::max(2u, opt_.threads));
    const int differing = (a != b) + (a != c);
    r.measured = differing;
    r.threshold = 0.0;
    r.status = differing == 0 ? CheckStatus::Pass : CheckStatus::Fail;
    r.detail = "3 renders (1, 1 and " + std::to_string(std::max(2u, opt_.threads)) + " threads), " +
               std::to_string(a.size()) + " bytes each";
    return r;
  }

 private:
  const RunConfig& cfg_;
  const ChemostatParams& p_;
  VerifyOptions opt_;
  std::optional<SpectralRun> spectral_;
};

}  // namespace

VerifyReport verify(const RunConfig& config, const VerifyOptions& opt) {
  Suite suite(config, opt);
  using Fn = CheckResult (Suite::*)();
  const std::pair<int, Fn> checks[] = {
      {1, &Suite::invariance},        {2, &Suite::sub_invariance},
      {3, &Suite::extinction},        {4, &Suite::roots},
      {5, &Suite::pure_death},        {6, &Suite::two_methods},
      {7, &Suite::rate_bound},        {8, &Suite::stationarity},
      {9, &Suite::exponential_absorption}, {10, &Suite::density_structure},
      {11, &Suite::drift},            {12, &Suite::determinism},
  };
  VerifyReport rep;
  for (const auto& [id, fn] : checks) {
    if (!opt.only.empty() && std::find(opt.only.begin(), opt.only.end(), id) == opt.only.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    CheckResult res;
    try {
      res = (suite.*fn)();
    } catch (const std::exception& e) {
      static const char* const names[] = {
          "",           "invariance",  "sub-invariance", "almost-sure extinction",
          "root oracle", "pure-death oracle", "two-method lambda", "rate bound",
          "stationarity", "exponential absorption", "density structure", "drift condition",
          "determinism"};
      res.id = id;
      res.name = names[id];
      res.status = CheckStatus::Fail;
      res.detail = std::string("error: ") + e.what();
    }
    res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (opt.progress) opt.progress(res);
    rep.checks.push_back(std::move(res));
  }
  return rep;
}

}  // namespace chemostat
