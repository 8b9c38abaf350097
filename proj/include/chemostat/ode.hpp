#pragma once

#include <functional>
#include <stdexcept>
#include <vector>

namespace chemostat {

/// The integrator could not meet its tolerance above the minimum step.
class StepFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One accepted Dormand-Prince step with its continuous extension, or a
/// constant piece (the nutrient pinned at zero).
struct FlowPiece {
  double t0 = 0.0;
  double t1 = 0.0;  ///< end of validity, t1 <= t0 + h
  double h = 0.0;   ///< step length the coefficients are parametrised on
  bool constant = false;
  // Dense output coefficients; for constant pieces only r[0] is used.
  double r[5] = {0, 0, 0, 0, 0};

  double at(double t) const;
  double y_begin() const { return r[0]; }
  double y_end() const { return at(t1); }
};

/// Nutrient path between two population jumps, as a sequence of pieces
/// covering [t_begin, t_end] contiguously.
class FlowPath {
 public:
  void clear() { pieces_.clear(); }
  void push(const FlowPiece& p) { pieces_.push_back(p); }
  bool empty() const { return pieces_.empty(); }
  double t_begin() const { return pieces_.front().t0; }
  double t_end() const { return pieces_.back().t1; }
  /// y(t) for t in [t_begin, t_end]; clamps outside.
  double at(double t) const;
  /// Drops everything after t, trimming the piece containing t.
  void truncate(double t);
  const std::vector<FlowPiece>& pieces() const { return pieces_; }

 private:
  std::vector<FlowPiece> pieces_;
};

struct OdeOptions {
  double rtol = 1e-9;
  double atol = 1e-12;
  double min_step = 1e-14;
  double max_step = 1e300;
};

/// Scalar autonomous ODE y' = f(y) driven by an adaptive Dormand-Prince
/// 5(4) pair with FSAL and Hairer's fourth-order continuous extension.
class Dopri5 {
 public:
  using Rhs = std::function<double(double)>;

  Dopri5(Rhs f, OdeOptions opt) : f_(std::move(f)), opt_(opt) {}

  void reset(double t, double y, double h_guess = 0.0);

  /// Advances one accepted step not past t_stop; returns the piece.
  /// Throws StepFailure if the step size falls below min_step.
  FlowPiece step(double t_stop);

  double t() const { return t_; }
  double y() const { return y_; }

 private:
  Rhs f_;
  OdeOptions opt_;
  double t_ = 0.0, y_ = 0.0, h_ = 0.0, k1_ = 0.0;
  bool have_k1_ = false;
};

}  // namespace chemostat
