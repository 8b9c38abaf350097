#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "chemostat/config.hpp"

namespace chemostat {

enum class CheckStatus { Pass, Fail, Skip };

std::string_view to_string(CheckStatus s);

struct CheckResult {
  int id = 0;
  std::string name;
  std::string property;  ///< the structural statement being checked
  CheckStatus status = CheckStatus::Skip;
  double measured = 0.0;
  double threshold = 0.0;
  std::string detail;
  double seconds = 0.0;
};

struct VerifyReport {
  std::vector<CheckResult> checks;
  bool all_passed() const;
  /// One line per check: "[PASS] 01 name  measured=... threshold=...  detail".
  std::string to_text() const;
};

struct VerifyOptions {
  /// Multiplies every path and particle count; 1 is the full desk scale.
  double scale = 1.0;
  unsigned threads = 1;
  std::uint64_t seed = 1;
  /// Restrict to these check ids (empty = all twelve).
  std::vector<int> only;
  /// Called after each check finishes.
  std::function<void(const CheckResult&)> progress;
};

/// Runs the twelve acceptance checks on the configured model.
VerifyReport verify(const RunConfig& config, const VerifyOptions& opt = {});

}  // namespace chemostat
