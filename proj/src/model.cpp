#include "chemostat/model.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <sstream>

namespace chemostat {

BirthLaw BirthLaw::monod(double b_inf, double K) {
  if (!(b_inf >= 0.0) || !std::isfinite(b_inf))
    throw ValidationError("birth: b_inf must be finite and >= 0");
  if (!(K > 0.0) || !std::isfinite(K))
    throw ValidationError("birth: K must be finite and > 0");
  BirthLaw law;
  law.kind_ = Kind::Monod;
  law.b_inf_ = b_inf;
  law.K_ = K;
  return law;
}

BirthLaw BirthLaw::tabulated(std::vector<double> y, std::vector<double> b) {
  if (y.size() != b.size() || y.size() < 2)
    throw ValidationError("birth: tabulated law needs >= 2 (y, b) nodes of equal count");
  if (y.front() != 0.0 || b.front() != 0.0)
    throw ValidationError("birth: tabulated law must start at (0, 0) since b(0) = 0");
  for (std::size_t i = 1; i < y.size(); ++i) {
    if (!std::isfinite(y[i]) || !std::isfinite(b[i]))
      throw ValidationError("birth: tabulated nodes must be finite");
    if (!(y[i] > y[i - 1]))
      throw ValidationError("birth: tabulated y nodes must be strictly increasing");
    if (!(b[i] > b[i - 1]))
      throw ValidationError("birth: tabulated b values must be strictly increasing");
  }
  BirthLaw law;
  law.kind_ = Kind::Tabulated;
  law.b_inf_ = b.back();
  law.ys_ = std::move(y);
  law.bs_ = std::move(b);
  return law;
}

double BirthLaw::operator()(double y) const {
  if (y <= 0.0) return 0.0;
  if (kind_ == Kind::Monod) return b_inf_ * y / (K_ + y);
  if (y >= ys_.back()) return bs_.back();
  auto hi = std::upper_bound(ys_.begin(), ys_.end(), y);
  const auto i = static_cast<std::size_t>(std::distance(ys_.begin(), hi));
  const double w = (y - ys_[i - 1]) / (ys_[i] - ys_[i - 1]);
  return bs_[i - 1] + w * (bs_[i] - bs_[i - 1]);
}

double BirthLaw::extended(double y) const {
  if (y >= 0.0) return (*this)(y);
  if (kind_ == Kind::Monod) {
    const double yc = std::max(y, -0.5 * K_);
    return b_inf_ * yc / (K_ + yc);
  }
  return y * (bs_[1] / ys_[1]);
}

double BirthLaw::sup() const { return b_inf_; }

bool BirthLaw::positive_slope_at_zero() const {
  if (kind_ == Kind::Monod) return b_inf_ > 0.0;
  return bs_[1] > 0.0;
}

double Rate::value() const {
  if (infinite_) throw std::logic_error("Rate::value() on the infinite sentinel");
  return value_;
}

DeathLaw DeathLaw::constant(double d_star) {
  if (!(d_star > 0.0) || !std::isfinite(d_star))
    throw ValidationError("death: d must be finite and > 0");
  DeathLaw law;
  law.kind_ = Kind::Constant;
  law.d0_ = d_star;
  return law;
}

DeathLaw DeathLaw::singular_power(double d0, double c, double sigma) {
  if (!(d0 >= 0.0) || !std::isfinite(d0)) throw ValidationError("death: d0 must be finite and >= 0");
  if (!(c >= 0.0) || !std::isfinite(c)) throw ValidationError("death: c must be finite and >= 0");
  if (!(sigma >= 0.0 && sigma < 1.0))
    throw ValidationError(
        "death: sigma must lie in [0, 1); the QSD existence theorem needs "
        "limsup_{y->0} y^sigma d(y) < infinity with sigma < 1");
  if (!(d0 + c > 0.0)) throw ValidationError("death: d(y) must be strictly positive");
  DeathLaw law;
  law.kind_ = Kind::SingularPower;
  law.d0_ = d0;
  law.c_ = c;
  law.sigma_ = sigma;
  return law;
}

DeathLaw DeathLaw::hard(DeathLaw tail) {
  tail.hard_ = true;
  return tail;
}

bool DeathLaw::infinite_at_zero() const {
  return hard_ || (kind_ == Kind::SingularPower && c_ > 0.0 && sigma_ > 0.0);
}

double DeathLaw::finite_part(double y) const {
  if (kind_ == Kind::Constant) return d0_;
  if (sigma_ == 0.0) return d0_ + c_;
  return d0_ + c_ * std::pow(y, -sigma_);
}

Rate DeathLaw::operator()(double y) const {
  if (y <= 0.0) {
    if (infinite_at_zero()) return Rate::infinite();
    return Rate::finite(kind_ == Kind::Constant ? d0_ : d0_ + c_);
  }
  return Rate::finite(finite_part(y));
}

double DeathLaw::cell_average(double a, double b) const {
  if (kind_ == Kind::Constant) return d0_;
  if (sigma_ == 0.0) return d0_ + c_;
  const double e = 1.0 - sigma_;
  return d0_ + c_ * (std::pow(b, e) - std::pow(a, e)) / (e * (b - a));
}

void ChemostatParams::validate() const {
  std::ostringstream err;
  if (!(D > 0.0) || !std::isfinite(D)) err << "D must be finite and > 0; ";
  if (!(y_star > 0.0) || !std::isfinite(y_star)) err << "y_star must be finite and > 0; ";
  if (!(R > 0.0) || !std::isfinite(R)) err << "R must be finite and > 0; ";
  if (!(eta >= 0.0) || !std::isfinite(eta)) err << "eta must be finite and >= 0; ";
  if (death.kind() == DeathLaw::Kind::SingularPower && !(death.sigma() < 1.0))
    err << "sigma must be < 1; ";
  const std::string msg = err.str();
  if (!msg.empty()) throw ValidationError(msg.substr(0, msg.size() - 2));
}

double consumption(const ChemostatParams& p, double y) {
  if (y <= 0.0) return 0.0;
  return p.birth(y) / p.R + p.eta;
}

double birth_rate(const ChemostatParams& p, std::int64_t n, double y) {
  if (n <= 0) return 0.0;
  return static_cast<double>(n) * p.birth(y);
}

Rate death_rate(const ChemostatParams& p, std::int64_t n, double y) {
  if (n <= 0) return Rate::finite(0.0);
  const Rate d = p.death(y);
  if (d.is_infinite()) return d;
  return Rate::finite(static_cast<double>(n) * (p.D + d.value()));
}

double drift(const ChemostatParams& p, std::int64_t n, double y) {
  return p.D * (p.y_star - y) - static_cast<double>(n) * consumption(p, y);
}

double drift_at_zero_plus(const ChemostatParams& p, std::int64_t n) {
  return p.D * p.y_star - static_cast<double>(n) * p.eta;
}

bool nutrient_sticks_at_zero(const ChemostatParams& p, std::int64_t n) {
  return n >= 1 && p.eta > 0.0 && static_cast<double>(n) * p.eta >= p.D * p.y_star;
}

}  // namespace chemostat
