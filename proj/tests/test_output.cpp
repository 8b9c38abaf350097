#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <sstream>

#include "chemostat/ensemble.hpp"
#include "chemostat/output.hpp"

using namespace chemostat;

namespace {

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

}  // namespace

TEST_CASE("doubles are written with enough digits to round trip") {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 123456789.123456789, -2.5e17}) {
    const auto s = format_double(v);
    CHECK(std::strtod(s.c_str(), nullptr) == v);
  }
  CHECK(format_double(INFINITY) == "inf");
  CHECK(format_double(NAN) == "nan");
}

TEST_CASE("csv headers are stable") {
  const ChemostatParams p;
  EnsembleOptions eo;
  eo.keep_trajectories = true;
  eo.sample_dt = 1.0;
  eo.t_grid = {0.0, 1.0};
  const auto e = ensemble(p, {2, 0.5, 0.0}, 3.0, 3, 1, eo);
  std::ostringstream ev, sm, sv, eq, de;
  write_events_csv(ev, e.trajectories);
  write_samples_csv(sm, e.trajectories);
  write_survival_csv(sv, e.t_grid, e.survivors, e.n_paths);
  CHECK(first_line(ev.str()) == "path,t,kind,n_after,y");
  CHECK(first_line(sm.str()) == "path,t,n,y");
  CHECK(first_line(sv.str()) == "t,survivors,S");
  CHECK(sv.str().find("\n0,3,1\n") != std::string::npos);

  const auto r = run_spectral(p, 16, 3);
  write_equilibria_csv(eq, r.eq);
  write_density_csv(de, r.est);
  CHECK(first_line(eq.str()) == "n,y_n,G_n_residual,exists");
  CHECK(first_line(de.str()) == "n,y_cell_center,u_n");
  std::size_t rows = 0;
  for (char ch : de.str()) rows += ch == '\n';
  CHECK(rows == 1 + 3 * r.est.disc.cells());
}

TEST_CASE("summary json carries the schema version and the bound") {
  const auto r = run_spectral(ChemostatParams{}, 32, 10);
  const auto j = qsd_summary_json(r.est, r.bound);
  CHECK(j["schema_version"] == kSchemaVersion);
  CHECK(j["method"] == "spectral");
  CHECK(j["bound_satisfied"] == true);
  CHECK(j["kappa"].size() == 10);
  CHECK_FALSE(j.contains("lambda_stderr"));
}
