#include "chemostat/output.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace chemostat {

std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_events_csv(std::ostream& os, std::span<const Trajectory> paths) {
  os << "path,t,kind,n_after,y\n";
  for (std::size_t i = 0; i < paths.size(); ++i)
    for (const auto& e : paths[i].events)
      os << i << ',' << format_double(e.t) << ',' << to_string(e.kind) << ',' << e.n_after << ','
         << format_double(e.y_at) << '\n';
}

void write_samples_csv(std::ostream& os, std::span<const Trajectory> paths) {
  os << "path,t,n,y\n";
  for (std::size_t i = 0; i < paths.size(); ++i)
    for (const auto& s : paths[i].samples)
      os << i << ',' << format_double(s.t) << ',' << s.n << ',' << format_double(s.y) << '\n';
}

void write_survival_csv(std::ostream& os, std::span<const double> t,
                        std::span<const std::int64_t> survivors, std::int64_t paths) {
  if (t.size() != survivors.size()) throw std::invalid_argument("survival csv: size mismatch");
  os << "t,survivors,S\n";
  for (std::size_t k = 0; k < t.size(); ++k)
    os << format_double(t[k]) << ',' << survivors[k] << ','
       << format_double(static_cast<double>(survivors[k]) / static_cast<double>(paths)) << '\n';
}

void write_equilibria_csv(std::ostream& os, const EquilibriaTable& table) {
  os << "n,y_n,G_n_residual,exists\n";
  for (const auto& e : table.entries) {
    os << e.n << ',';
    if (e.exists) os << format_double(e.y) << ',' << format_double(e.residual);
    else os << ',';
    os << ',' << (e.exists ? "true" : "false") << '\n';
  }
}

void write_density_csv(std::ostream& os, const QsdEstimate& est) {
  const bool se = !est.density_stderr.empty();
  os << "n,y_cell_center,u_n" << (se ? ",u_n_stderr" : "") << '\n';
  for (std::int64_t n = 1; n <= est.n_max(); ++n) {
    const auto k = static_cast<std::size_t>(n - 1);
    if (k < est.atom_at_zero.size() && est.atom_at_zero[k] > 0.0) {
      os << n << ',' << format_double(0.0) << ',' << format_double(est.atom_at_zero[k]);
      if (se) os << ',';
      os << '\n';
    }
    for (std::size_t j = 0; j < est.disc.cells(); ++j) {
      os << n << ',' << format_double(est.disc.center(j)) << ',' << format_double(est.density[k][j]);
      if (se) os << ',' << format_double(est.density_stderr[k][j]);
      os << '\n';
    }
  }
}

nlohmann::ordered_json qsd_summary_json(const QsdEstimate& est, double bound_rhs) {
  nlohmann::ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["method"] = est.method;
  j["lambda"] = est.lambda;
  if (est.lambda_stderr > 0.0) j["lambda_stderr"] = est.lambda_stderr;
  j["kappa"] = est.kappa;
  if (!est.kappa_stderr.empty()) j["kappa_stderr"] = est.kappa_stderr;
  j["atom_at_zero"] = est.atom_at_zero;
  j["residual"] = est.residual;
  j["iterations"] = est.iterations;
  j["cells"] = est.disc.cells();
  j["n_max"] = est.disc.n_max;
  j["y_max"] = est.disc.y_max();
  j["bound_rhs"] = bound_rhs;
  j["bound_satisfied"] = est.lambda < bound_rhs;
  return j;
}

void write_file(const std::string& path, const std::string& text) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace chemostat
