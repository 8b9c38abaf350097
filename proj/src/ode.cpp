#include "chemostat/ode.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace chemostat {

namespace {

// Dormand-Prince 5(4) tableau; the node row c is unused since f = f(y).
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
// Continuous extension.
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

}  // namespace

double FlowPiece::at(double t) const {
  if (constant) return r[0];
  const double s = h > 0.0 ? std::clamp((t - t0) / h, 0.0, 1.0) : 0.0;
  const double s1 = 1.0 - s;
  return r[0] + s * (r[1] + s1 * (r[2] + s * (r[3] + s1 * r[4])));
}

double FlowPath::at(double t) const {
  if (pieces_.empty()) throw std::logic_error("FlowPath::at on empty path");
  if (t <= pieces_.front().t0) return pieces_.front().y_begin();
  auto it = std::lower_bound(pieces_.begin(), pieces_.end(), t,
                             [](const FlowPiece& p, double v) { return p.t1 < v; });
  if (it == pieces_.end()) return pieces_.back().y_end();
  return it->at(t);
}

void FlowPath::truncate(double t) {
  while (!pieces_.empty() && pieces_.back().t0 > t) pieces_.pop_back();
  if (!pieces_.empty() && pieces_.back().t1 > t) pieces_.back().t1 = t;
}

void Dopri5::reset(double t, double y, double h_guess) {
  t_ = t;
  y_ = y;
  k1_ = f_(y);
  have_k1_ = true;
  if (h_guess > 0.0) {
    h_ = h_guess;
  } else {
    // Hairer's starting-step heuristic for order 5.
    const double sc = opt_.atol + opt_.rtol * std::abs(y);
    const double d0 = std::abs(y) / sc, d1v = std::abs(k1_) / sc;
    double h0 = (d0 < 1e-5 || d1v < 1e-5) ? 1e-6 : 0.01 * d0 / d1v;
    h0 = std::min(h0, opt_.max_step);
    const double y1 = y + h0 * k1_;
    const double d2 = std::abs(f_(y1) - k1_) / sc / h0;
    const double h1 = std::max(d1v, d2) <= 1e-15 ? std::max(1e-6, h0 * 1e-3)
                                                : std::pow(0.01 / std::max(d1v, d2), 0.2);
    h_ = std::min({100.0 * h0, h1, opt_.max_step});
  }
}

FlowPiece Dopri5::step(double t_stop) {
  if (!have_k1_) throw std::logic_error("Dopri5::step before reset");
  for (;;) {
    double h = std::min(h_, opt_.max_step);
    bool last = false;
    if (t_ + h >= t_stop) {
      h = t_stop - t_;
      last = true;
    }
    if (h < opt_.min_step && !last) {
      std::ostringstream os;
      os << "ODE step size " << h << " below minimum at t=" << t_ << ", y=" << y_;
      throw StepFailure(os.str());
    }
    const double y = y_, k1 = k1_;
    const double k2 = f_(y + h * a21 * k1);
    const double k3 = f_(y + h * (a31 * k1 + a32 * k2));
    const double k4 = f_(y + h * (a41 * k1 + a42 * k2 + a43 * k3));
    const double k5 = f_(y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    const double k6 = f_(y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    const double y1 = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
    const double k7 = f_(y1);
    const double err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    const double sc = opt_.atol + opt_.rtol * std::max(std::abs(y), std::abs(y1));
    const double enorm = std::abs(err) / sc;
    if (!std::isfinite(enorm)) {
      h_ = 0.25 * h;
      if (h_ < opt_.min_step) throw StepFailure("non-finite ODE right-hand side");
      continue;
    }
    const double fac = enorm == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(enorm, -0.2), 0.2, 5.0);
    if (enorm <= 1.0) {
      FlowPiece p;
      p.t0 = t_;
      p.t1 = last ? t_stop : t_ + h;
      p.h = p.t1 - p.t0;
      const double ydiff = y1 - y;
      const double bspl = h * k1 - ydiff;
      p.r[0] = y;
      p.r[1] = ydiff;
      p.r[2] = bspl;
      p.r[3] = ydiff - h * k7 - bspl;
      p.r[4] = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
      t_ = p.t1;
      y_ = y1;
      k1_ = k7;
      // Do not let a short final step shrink the next guess.
      if (!last) h_ = h * fac;
      return p;
    }
    h_ = h * std::min(1.0, fac);
    if (h_ < opt_.min_step) {
      std::ostringstream os;
      os << "ODE step size " << h_ << " below minimum at t=" << t_ << ", y=" << y_;
      throw StepFailure(os.str());
    }
  }
}

}  // namespace chemostat
