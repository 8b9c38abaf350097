// Command-line front end: simulate, equilibria, qsd-spectral, qsd-particle
// and verify on a shared config file.

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#include "chemostat/config.hpp"
#include "chemostat/ensemble.hpp"
#include "chemostat/output.hpp"
#include "chemostat/qsd_particle.hpp"
#include "chemostat/verify.hpp"

namespace {

using namespace chemostat;

constexpr int kExitCheckFailure = 1;
constexpr int kExitNumerical = 2;
constexpr int kExitConfig = 3;

struct Globals {
  std::optional<std::string> config;
  std::optional<std::uint64_t> seed;
  std::string out_dir = ".";
  std::optional<unsigned> threads;
  bool quiet = false;
};

struct SimulateArgs {
  std::optional<std::int64_t> n0, paths;
  std::optional<double> y0, horizon, sample_dt;
  std::string out = "simulate";
};

struct EquilibriaArgs {
  std::optional<std::int64_t> n_max;
  std::optional<double> tol;
  std::string out = "equilibria.csv";
};

struct SpectralArgs {
  std::optional<std::size_t> cells;
  std::optional<std::int64_t> n_max;
  std::optional<std::string> y_max;
  std::optional<double> tol;
  std::string out = "qsd_spectral";
};

struct ParticleArgs {
  std::optional<std::int64_t> particles;
  std::optional<double> t_end, burn_in;
  std::string out = "qsd_particle";
};

struct VerifyArgs {
  double scale = 1.0;
  std::vector<int> only;
  std::string out = "verify.json";
};

std::string in_dir(const Globals& g, const std::string& name) {
  return (std::filesystem::path(g.out_dir) / name).string();
}

RunConfig load(const Globals& g) {
  RunConfig c = g.config ? parse_config(*g.config) : RunConfig{};
  if (g.seed) c.run.seed = *g.seed;
  if (g.threads) c.run.threads = std::max(1u, *g.threads);
  return c;
}

void apply_spectral(RunConfig& c, const SpectralArgs& a) {
  if (a.cells) c.spectral.cells = *a.cells;
  if (a.n_max) c.spectral.n_max = *a.n_max;
  if (a.tol) c.spectral.tol = *a.tol;
  if (a.y_max) c.spectral.y_max = *a.y_max == "ystar" ? GridTop::YStar : GridTop::Y1;
}

SolveOptions solve_options(const RunConfig& c) {
  SolveOptions s;
  s.tol = c.spectral.tol;
  s.max_iter = c.spectral.max_iter;
  return s;
}

int run_simulate(const Globals& g, const SimulateArgs& a) {
  RunConfig c = load(g);
  auto& s = c.simulate;
  if (a.n0) s.n0 = *a.n0;
  if (a.y0) s.y0 = *a.y0;
  if (a.horizon) s.horizon = *a.horizon;
  if (a.paths) s.paths = *a.paths;
  if (a.sample_dt) s.sample_dt = *a.sample_dt;

  EnsembleOptions eo;
  eo.threads = c.run.threads;
  eo.ode_tol = c.run.ode_tol;
  eo.keep_trajectories = true;
  eo.sample_dt = s.sample_dt;
  const auto steps = static_cast<std::int64_t>(std::floor(s.horizon / s.survival_dt + 1e-9));
  for (std::int64_t k = 0; k <= steps; ++k) eo.t_grid.push_back(static_cast<double>(k) * s.survival_dt);
  const auto ens = ensemble(c.params, HybridState{s.n0, s.y0, 0.0}, s.horizon, s.paths, c.run.seed, eo);

  std::ostringstream events, survival;
  write_events_csv(events, ens.trajectories);
  write_survival_csv(survival, ens.t_grid, ens.survivors, ens.n_paths);
  write_file(in_dir(g, a.out + "_events.csv"), events.str());
  write_file(in_dir(g, a.out + "_survival.csv"), survival.str());
  if (s.sample_dt) {
    std::ostringstream samples;
    write_samples_csv(samples, ens.trajectories);
    write_file(in_dir(g, a.out + "_samples.csv"), samples.str());
  }
  if (!g.quiet) {
    const auto absorbed = std::count_if(ens.extinction_times.begin(), ens.extinction_times.end(),
                                        [](double t) { return std::isfinite(t); });
    std::cout << "simulated " << ens.n_paths << " paths, " << absorbed << " absorbed by t = " << s.horizon
              << "\n";
  }
  return 0;
}

int run_equilibria(const Globals& g, const EquilibriaArgs& a) {
  RunConfig c = load(g);
  if (a.n_max) c.equilibria.n_max = *a.n_max;
  if (a.tol) c.equilibria.tol = *a.tol;
  const auto table = equilibria_table(c.params, c.equilibria.n_max, c.equilibria.tol);
  std::ostringstream os;
  write_equilibria_csv(os, table);
  write_file(in_dir(g, a.out), os.str());
  if (!g.quiet) {
    std::cout << table.roots().size() << " roots for n = 0.." << c.equilibria.n_max;
    if (table.n0) std::cout << ", n0 = " << *table.n0;
    std::cout << "\n";
  }
  return 0;
}

int run_spectral_cmd(const Globals& g, const SpectralArgs& a) {
  RunConfig c = load(g);
  apply_spectral(c, a);
  const SpectralRun r = run_spectral(c.params, c.spectral.cells, c.spectral.n_max, c.spectral.y_max, solve_options(c));
  std::ostringstream density;
  write_density_csv(density, r.est);
  write_file(in_dir(g, a.out + "_density.csv"), density.str());
  write_file(in_dir(g, a.out + "_summary.json"), qsd_summary_json(r.est, r.bound).dump(2) + "\n");
  if (!g.quiet)
    std::cout << "lambda = " << format_double(r.est.lambda) << ", bound = " << format_double(r.bound)
              << ", residual = " << r.est.residual << "\n";
  return 0;
}

int run_particle(const Globals& g, const SpectralArgs& grid, const ParticleArgs& a) {
  RunConfig c = load(g);
  apply_spectral(c, grid);
  if (a.particles) c.particle.particles = *a.particles;
  if (a.t_end) c.particle.t_end = *a.t_end;
  if (a.burn_in) c.particle.burn_in = *a.burn_in;

  const auto eq = equilibria_table(c.params, c.spectral.n_max, default_root_tol(c.params));
  const auto disc = make_discretization(c.params, eq, c.spectral.cells, c.spectral.n_max, c.spectral.y_max);
  FlemingViotOptions fo;
  fo.ode_tol = c.run.ode_tol;
  fo.burn_in = c.particle.burn_in;
  fo.snapshot_dt = c.particle.snapshot_dt;
  fo.batches = c.particle.batches;
  const std::vector<HybridState> init{{std::max<std::int64_t>(c.simulate.n0, 1), c.simulate.y0, 0.0}};
  const auto fv = fleming_viot(c.params, c.particle.particles, c.particle.t_end, init, c.run.seed, disc, fo);

  std::ostringstream density;
  write_density_csv(density, fv.estimate);
  auto summary = qsd_summary_json(fv.estimate, survival_rate_bound(c.params, eq));
  summary["particles"] = fv.particles;
  summary["burn_in"] = fv.burn_in;
  summary["t_end"] = fv.t_end;
  summary["resamples"] = fv.resamples;
  summary["mass_outside_grid"] = fv.mass_outside_grid;
  write_file(in_dir(g, a.out + "_density.csv"), density.str());
  write_file(in_dir(g, a.out + "_summary.json"), summary.dump(2) + "\n");
  if (!g.quiet)
    std::cout << "lambda = " << format_double(fv.estimate.lambda) << " +- "
              << format_double(fv.estimate.lambda_stderr) << " (" << fv.resamples << " resamples)\n";
  return 0;
}

int run_verify(const Globals& g, const VerifyArgs& a) {
  const RunConfig c = load(g);
  VerifyOptions vo;
  vo.scale = a.scale;
  vo.threads = c.run.threads;
  vo.seed = c.run.seed;
  vo.only = a.only;
  if (!g.quiet)
    vo.progress = [](const CheckResult& r) {
      VerifyReport one;
      one.checks.push_back(r);
      std::cout << one.to_text() << std::flush;
    };
  const VerifyReport rep = verify(c, vo);
  nlohmann::ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["all_passed"] = rep.all_passed();
  for (const auto& r : rep.checks)
    j["checks"].push_back({{"id", r.id},
                           {"name", r.name},
                           {"property", r.property},
                           {"status", std::string(to_string(r.status))},
                           {"measured", r.measured},
                           {"threshold", r.threshold},
                           {"detail", r.detail},
                           {"seconds", r.seconds}});
  write_file(in_dir(g, a.out), j.dump(2) + "\n");
  return rep.all_passed() ? 0 : kExitCheckFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic chemostat: exact simulation, equilibria and quasi-stationary distributions"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config, "INI config file (desk defaults when omitted)");
  app.add_option("--seed", g.seed, "Override run.seed");
  app.add_option("--out-dir", g.out_dir, "Directory for output files");
  app.add_option("--threads", g.threads, "Override run.threads")->check(CLI::PositiveNumber);
  app.add_flag("--quiet", g.quiet, "Suppress console output");

  SimulateArgs sim;
  auto* cmd_sim = app.add_subcommand("simulate", "Exact path simulation and survival curve");
  cmd_sim->add_option("--n0", sim.n0, "Initial population");
  cmd_sim->add_option("--y0", sim.y0, "Initial nutrient concentration");
  cmd_sim->add_option("--horizon", sim.horizon, "Time horizon");
  cmd_sim->add_option("--paths", sim.paths, "Number of paths");
  cmd_sim->add_option("--sample-dt", sim.sample_dt, "Dense sample spacing");
  cmd_sim->add_option("--out", sim.out, "Output file stem inside --out-dir");

  EquilibriaArgs eqa;
  auto* cmd_eq = app.add_subcommand("equilibria", "Nutrient equilibria y_n");
  cmd_eq->add_option("--nmax", eqa.n_max, "Largest n");
  cmd_eq->add_option("--tol", eqa.tol, "Bisection bracket width");
  cmd_eq->add_option("--out", eqa.out, "CSV file inside --out-dir");

  SpectralArgs spa;
  auto* cmd_sp = app.add_subcommand("qsd-spectral", "QSD and survival rate from the sparse eigenproblem");
  cmd_sp->add_option("--cells", spa.cells, "Uniform cells before root insertion");
  cmd_sp->add_option("--nmax", spa.n_max, "Population truncation");
  cmd_sp->add_option("--ymax", spa.y_max, "Grid top")->check(CLI::IsMember({"y1", "ystar"}));
  cmd_sp->add_option("--tol", spa.tol, "Eigen-residual tolerance");
  cmd_sp->add_option("--out", spa.out, "Output file stem inside --out-dir");

  SpectralArgs pgrid;
  ParticleArgs pa;
  auto* cmd_pa = app.add_subcommand("qsd-particle", "QSD and survival rate from a Fleming-Viot particle system");
  cmd_pa->add_option("--particles", pa.particles, "Number of particles");
  cmd_pa->add_option("--t-end", pa.t_end, "End time");
  cmd_pa->add_option("--burn-in", pa.burn_in, "Burn-in (default 10 / lambda from a pilot run)");
  cmd_pa->add_option("--cells", pgrid.cells, "Histogram grid cells");
  cmd_pa->add_option("--nmax", pgrid.n_max, "Histogram population levels");
  cmd_pa->add_option("--ymax", pgrid.y_max, "Histogram grid top")->check(CLI::IsMember({"y1", "ystar"}));
  cmd_pa->add_option("--out", pa.out, "Output file stem inside --out-dir");

  VerifyArgs va;
  auto* cmd_ver = app.add_subcommand("verify", "Run the acceptance checks");
  cmd_ver->add_option("--scale", va.scale, "Multiplier on path and particle counts")->check(CLI::PositiveNumber);
  cmd_ver->add_option("--only", va.only, "Check ids to run")->check(CLI::Range(1, 12));
  cmd_ver->add_option("--out", va.out, "JSON report inside --out-dir");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*cmd_sim) return run_simulate(g, sim);
    if (*cmd_eq) return run_equilibria(g, eqa);
    if (*cmd_sp) return run_spectral_cmd(g, spa);
    if (*cmd_pa) return run_particle(g, pgrid, pa);
    if (*cmd_ver) return run_verify(g, va);
  } catch (const ParseError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ValidationError& e) {
    std::cerr << "invalid value: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid argument: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }
  return 0;
}
