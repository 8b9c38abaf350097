#pragma once

#include <ostream>
#include <span>
#include <string>

#include <json.hpp>

#include "chemostat/equilibria.hpp"
#include "chemostat/qsd_particle.hpp"
#include "chemostat/qsd_spectral.hpp"
#include "chemostat/simulator.hpp"

namespace chemostat {

inline constexpr int kSchemaVersion = 1;

/// 17 significant digits, so values survive a text round trip bit for bit.
std::string format_double(double v);

/// Columns: path, t, kind, n_after, y.
void write_events_csv(std::ostream& os, std::span<const Trajectory> paths);

/// Columns: path, t, n, y.
void write_samples_csv(std::ostream& os, std::span<const Trajectory> paths);

/// Columns: t, survivors, S.
void write_survival_csv(std::ostream& os, std::span<const double> t,
                        std::span<const std::int64_t> survivors, std::int64_t paths);

/// Columns: n, y_n, G_n_residual, exists.
void write_equilibria_csv(std::ostream& os, const EquilibriaTable& table);

/// Columns: n, y_cell_center, u_n, and u_n_stderr when the estimate has
/// standard errors. Atoms at y = 0 are listed as extra rows with
/// y_cell_center = 0 and u_n holding the atom mass.
void write_density_csv(std::ostream& os, const QsdEstimate& est);

/// lambda, kappa[], residual, bound_rhs, bound_satisfied and a schema
/// version; standard errors are included when present.
nlohmann::ordered_json qsd_summary_json(const QsdEstimate& est, double bound_rhs);

/// Writes text to path, creating parent directories.
void write_file(const std::string& path, const std::string& text);

}  // namespace chemostat
