#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace chemostat {

/// Raised when model constants violate their domain (D > 0, sigma < 1, ...).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Per-capita birth rate b(y).
///
/// Either the Monod law b(y) = b_inf * y / (K + y) or a tabulated monotone
/// curve interpolated piecewise-linearly and held constant past its last
/// node. Both satisfy b(0) = 0 and b <= b_inf.
class BirthLaw {
 public:
  enum class Kind { Monod, Tabulated };

  static BirthLaw monod(double b_inf, double K);
  /// Nodes must start at (0, 0) with strictly increasing y and b.
  static BirthLaw tabulated(std::vector<double> y, std::vector<double> b);

  double operator()(double y) const;
  /// Smooth continuation to y < 0, used only inside Runge-Kutta stages that
  /// probe slightly past the y = 0 boundary before the crossing is located.
  double extended(double y) const;
  double sup() const;

  Kind kind() const { return kind_; }
  double b_inf() const { return b_inf_; }
  double K() const { return K_; }
  const std::vector<double>& nodes_y() const { return ys_; }
  const std::vector<double>& nodes_b() const { return bs_; }
  /// Whether db/dy(0) > 0 (metadata only, never enforced).
  bool positive_slope_at_zero() const;

 private:
  Kind kind_ = Kind::Monod;
  double b_inf_ = 0.0;
  double K_ = 1.0;
  std::vector<double> ys_, bs_;
};

/// A rate that may be the d(0) = infinity sentinel. The infinite case is
/// never stored as a floating point value.
class Rate {
 public:
  static Rate finite(double v) { return Rate(v, false); }
  static Rate infinite() { return Rate(0.0, true); }

  bool is_infinite() const { return infinite_; }
  /// Precondition: !is_infinite().
  double value() const;

  friend bool operator==(const Rate&, const Rate&) = default;

 private:
  Rate(double v, bool inf) : value_(v), infinite_(inf) {}
  double value_;
  bool infinite_;
};

/// Background death rate d(y) = d0 + c * y^(-sigma).
///
/// Constant laws have c = 0. A hard-death law carries the flag that d(0) is
/// infinite (all bacteria die as soon as the nutrient is exhausted) on top
/// of its finite tail for y > 0.
class DeathLaw {
 public:
  enum class Kind { Constant, SingularPower };

  static DeathLaw constant(double d_star);
  static DeathLaw singular_power(double d0, double c, double sigma);
  static DeathLaw hard(DeathLaw tail);

  /// d(y); infinite at y == 0 for hard-death laws and for singular tails.
  Rate operator()(double y) const;
  /// d(y) for y > 0 only.
  double finite_part(double y) const;
  /// Mean of d over [a, b] with 0 <= a < b, exact for the singular tail.
  double cell_average(double a, double b) const;

  Kind kind() const { return kind_; }
  bool is_hard() const { return hard_; }
  double d0() const { return d0_; }
  double c() const { return c_; }
  double sigma() const { return sigma_; }
  /// True when d(0) is infinite.
  bool infinite_at_zero() const;

 private:
  Kind kind_ = Kind::Constant;
  double d0_ = 0.0;
  double c_ = 0.0;
  double sigma_ = 0.0;
  bool hard_ = false;
};

/// Defaults are the desk-scale Monod set used throughout the tests.
struct ChemostatParams {
  double D = 1.0;       ///< dilution rate
  double y_star = 1.0;  ///< input nutrient concentration
  double R = 1.0;       ///< biomass yield
  double eta = 0.0;     ///< maintenance consumption
  BirthLaw birth = BirthLaw::monod(5.0, 1.0);
  DeathLaw death = DeathLaw::constant(1.0);

  /// Throws ValidationError when an invariant fails.
  void validate() const;
};

/// b~(y) = b(y)/R + eta * 1{y > 0}.
double consumption(const ChemostatParams& p, double y);

/// n * b(y).
double birth_rate(const ChemostatParams& p, std::int64_t n, double y);

/// n * (D + d(y)); infinite only when d(y) is and n > 0.
Rate death_rate(const ChemostatParams& p, std::int64_t n, double y);

/// G_n(y) = D (y* - y) - n b~(y), the nutrient velocity at fixed n.
double drift(const ChemostatParams& p, std::int64_t n, double y);

/// lim_{y -> 0+} G_n(y) = D y* - n eta.
double drift_at_zero_plus(const ChemostatParams& p, std::int64_t n);

/// True when Y is pinned at 0 once it gets there: n * eta >= D * y*.
bool nutrient_sticks_at_zero(const ChemostatParams& p, std::int64_t n);

}  // namespace chemostat
