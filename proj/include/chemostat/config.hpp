#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include "chemostat/model.hpp"
#include "chemostat/qsd_spectral.hpp"

namespace chemostat {

/// Malformed config text; the message starts with "<source>:<line>:".
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunSettings {
  std::uint64_t seed = 1;
  unsigned threads = 1;
  double ode_tol = 1e-9;
};

struct SimulateSettings {
  std::int64_t n0 = 5;
  double y0 = 0.5;
  double horizon = 50.0;
  std::int64_t paths = 1000;
  std::optional<double> sample_dt;  ///< "none" in the file
  double survival_dt = 0.1;         ///< spacing of the survival curve grid
};

struct EquilibriaSettings {
  std::int64_t n_max = 50;
  double tol = 1e-12;  ///< filled with 1e-12 * y_star unless given
};

struct SpectralSettings {
  std::size_t cells = 512;
  std::int64_t n_max = 50;
  GridTop y_max = GridTop::Y1;
  double tol = 1e-10;
  int max_iter = 2000;
};

struct ParticleSettings {
  std::int64_t particles = 10000;
  double t_end = 30.0;
  std::optional<double> burn_in;  ///< "auto" in the file
  double snapshot_dt = 0.05;
  int batches = 20;
  // Conditioned ensemble.
  std::int64_t paths = 10000;
  double ensemble_dt = 0.02;
  double ensemble_horizon = 8.0;
};

struct RunConfig {
  ChemostatParams params;
  RunSettings run;
  SimulateSettings simulate;
  EquilibriaSettings equilibria;
  SpectralSettings spectral;
  ParticleSettings particle;
};

/// Parses INI-style text. `source` names the input in error messages.
/// Throws ParseError for syntax problems and ValidationError for values
/// outside their domain, both tagged with the offending line.
RunConfig parse_config_text(const std::string& text, const std::string& source = "<config>");

/// Reads and parses a file; a missing file is a ParseError.
RunConfig parse_config(const std::string& path);

/// Every key written explicitly; parse_config_text(write_config(c)) == c.
std::string write_config(const RunConfig& c);

}  // namespace chemostat
