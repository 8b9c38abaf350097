#include "chemostat/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/tools/toms748_solve.hpp>

namespace chemostat {

namespace {

// Floor for y inside hazard evaluations; only reached at a located y = 0
// crossing, where the integrable singularity of d sits at the endpoint.
constexpr double kTinyY = 1e-300;

double hazard(const ChemostatParams& p, std::int64_t n, double y) {
  const double yy = std::max(y, kTinyY);
  return static_cast<double>(n) * (p.birth(yy) + p.D + p.death.finite_part(yy));
}

double integrate_hazard(const ChemostatParams& p, std::int64_t n, const FlowPiece& piece,
                        double a, double b) {
  if (!(b > a)) return 0.0;
  auto f = [&](double t) { return hazard(p, n, piece.at(t)); };
  if (p.death.c() > 0.0 && p.death.sigma() > 0.0) {
    // y^(-sigma) may blow up at a located crossing endpoint.
    thread_local boost::math::quadrature::tanh_sinh<double> ts;
    return ts.integrate(f, a, b, 1e-10);
  }
  // The integrand is smooth over one accepted step; a single GK15 panel is
  // accurate to rounding.
  return boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, 0);
}

OdeOptions ode_options(const ChemostatParams& p, double ode_tol, double y0) {
  OdeOptions o;
  o.rtol = ode_tol;
  o.atol = ode_tol * std::max(p.y_star, y0);
  o.min_step = 1e-14 / p.D;
  return o;
}

Dopri5::Rhs nutrient_rhs(const ChemostatParams& p, std::int64_t n) {
  // Valid while y > 0 (eta indicator on); stages probing y < 0 use the
  // smooth continuation of b.
  return [&p, n](double y) {
    return p.D * (p.y_star - y) - static_cast<double>(n) * (p.birth.extended(y) / p.R + p.eta);
  };
}

double solve_bracketed(const auto& g, double a, double b, double ga, double gb) {
  if (gb == 0.0) return b;
  if (ga == 0.0) return a;
  std::uintmax_t iters = 200;
  const auto r = boost::math::tools::toms748_solve(
      g, a, b, ga, gb, boost::math::tools::eps_tolerance<double>(52), iters);
  return 0.5 * (r.first + r.second);
}

/// First time in the piece where y reaches 0 (piece starts positive and
/// ends non-positive).
double locate_zero(const FlowPiece& piece) {
  auto g = [&](double t) { return piece.at(t); };
  const double a = piece.t0, b = piece.t1;
  const double tz = solve_bracketed(g, a, b, g(a), g(b));
  return tz;
}

JumpKind pick_kind(const ChemostatParams& p, double y, CounterRng& rng) {
  const double b = p.birth(y);
  const double d = p.death(y).value();
  const double u = rng.uniform() * (b + p.D + d);
  if (u < b) return JumpKind::Birth;
  if (u < b + p.D) return JumpKind::Washout;
  return JumpKind::Death;
}

FlowPiece constant_piece(double t0, double t1, double y) {
  FlowPiece c;
  c.t0 = t0;
  c.t1 = t1;
  c.h = t1 - t0;
  c.constant = true;
  c.r[0] = y;
  return c;
}

}  // namespace

std::string_view to_string(EventKind k) {
  switch (k) {
    case EventKind::Birth: return "Birth";
    case EventKind::Death: return "Death";
    case EventKind::Washout: return "Washout";
    case EventKind::Extinction: return "Extinction";
    case EventKind::NutrientHitZero: return "NutrientHitZero";
    case EventKind::NutrientLeaveZero: return "NutrientLeaveZero";
  }
  return "?";
}

double flow(const ChemostatParams& p, std::int64_t n, double y0, double dt, double ode_tol) {
  if (dt < 0.0) throw std::invalid_argument("flow: dt must be >= 0");
  if (y0 < 0.0) throw std::invalid_argument("flow: y0 must be >= 0");
  if (n == 0) return p.y_star - (p.y_star - y0) * std::exp(-p.D * dt);
  if (dt == 0.0) return y0;
  if (y0 == 0.0 && nutrient_sticks_at_zero(p, n)) return 0.0;
  Dopri5 ode(nutrient_rhs(p, n), ode_options(p, ode_tol, y0));
  ode.reset(0.0, y0);
  while (ode.t() < dt) {
    const FlowPiece piece = ode.step(dt);
    if (piece.y_end() <= 0.0) return 0.0;  // pinned from here on
  }
  return std::max(ode.y(), 0.0);
}

JumpOutcome next_jump(const ChemostatParams& p, const HybridState& state, CounterRng& rng,
                      double ode_tol, double t_limit, FlowPath* path) {
  if (state.n < 1) throw std::invalid_argument("next_jump: population must be >= 1");
  const std::int64_t n = state.n;
  double t = state.t;
  double y = std::max(state.y, 0.0);
  if (path) path->clear();

  JumpOutcome out;
  out.y_max = out.y_min = y;
  const double target = rng.exponential();
  double acc = 0.0;

  auto finish = [&](double tj, JumpKind kind, double yj) {
    out.t = tj;
    out.kind = kind;
    out.y = yj;
    out.y_max = std::max(out.y_max, yj);
    out.y_min = std::min(out.y_min, yj);
    return out;
  };

  bool pinned = false;
  if (y == 0.0) {
    if (p.death.is_hard()) {
      if (path) path->push(constant_piece(t, t, 0.0));
      return finish(t, JumpKind::HardExtinction, 0.0);
    }
    if (nutrient_sticks_at_zero(p, n)) {
      if (p.death.infinite_at_zero()) {
        if (path) path->push(constant_piece(t, t, 0.0));
        return finish(t, JumpKind::HardExtinction, 0.0);
      }
      pinned = true;
    }
  }

  if (!pinned) {
    Dopri5 ode(nutrient_rhs(p, n), ode_options(p, ode_tol, y));
    ode.reset(t, y);
    for (;;) {
      if (t >= t_limit) {
        if (path && path->empty()) path->push(constant_piece(t, t, y));
        return finish(t_limit, JumpKind::None, y);
      }
      FlowPiece piece = ode.step(t_limit);
      bool hit_zero = false;
      if (piece.y_end() <= 0.0 && piece.y_begin() > 0.0) {
        piece.t1 = locate_zero(piece);
        hit_zero = true;
      }
      const double dh = integrate_hazard(p, n, piece, piece.t0, piece.t1);
      if (acc + dh >= target) {
        auto g = [&](double tau) { return acc + integrate_hazard(p, n, piece, piece.t0, tau) - target; };
        const double tj = solve_bracketed(g, piece.t0, piece.t1, acc - target, acc + dh - target);
        piece.t1 = tj;
        if (path) path->push(piece);
        const double yj = std::max(piece.at(tj), 0.0);
        return finish(tj, pick_kind(p, yj, rng), yj);
      }
      acc += dh;
      if (path) path->push(piece);
      t = piece.t1;
      y = hit_zero ? 0.0 : std::max(piece.y_end(), 0.0);
      out.y_max = std::max(out.y_max, y);
      out.y_min = std::min(out.y_min, y);
      if (hit_zero) {
        out.t_hit_zero = t;
        if (p.death.is_hard() ||
            (nutrient_sticks_at_zero(p, n) && p.death.infinite_at_zero()))
          return finish(t, JumpKind::HardExtinction, 0.0);
        if (nutrient_sticks_at_zero(p, n)) {
          pinned = true;
          break;
        }
        ode.reset(t, 0.0);
      }
    }
  }

  // Pinned at y = 0: b(0) = 0 and the hazard is the constant n (D + d(0)).
  const double rate = static_cast<double>(n) * (p.D + p.death(0.0).value());
  const double tj = t + (target - acc) / rate;
  if (tj >= t_limit) {
    if (path) path->push(constant_piece(t, t_limit, 0.0));
    return finish(t_limit, JumpKind::None, 0.0);
  }
  if (path) path->push(constant_piece(t, tj, 0.0));
  return finish(tj, pick_kind(p, 0.0, rng), 0.0);
}

Trajectory simulate(const ChemostatParams& p, const HybridState& initial, double horizon,
                    std::uint64_t seed, const SimOptions& opt) {
  if (!(horizon > 0.0)) throw std::invalid_argument("simulate: horizon must be > 0");
  if (initial.n < 0 || initial.y < 0.0)
    throw std::invalid_argument("simulate: initial state needs n >= 0 and y >= 0");
  if (opt.sample_dt && !(*opt.sample_dt > 0.0))
    throw std::invalid_argument("simulate: sample_dt must be > 0");

  Trajectory tr;
  tr.params = p;
  tr.seed = seed;
  tr.initial = initial;
  CounterRng rng(seed, 0);
  HybridState s = initial;
  tr.y_max_alive = tr.y_min_alive = s.y;
  const double t_end = initial.t + horizon;

  FlowPath path;
  std::int64_t sample_k = 0;
  auto sample_time = [&](std::int64_t k) { return initial.t + static_cast<double>(k) * *opt.sample_dt; };

  auto absorb = [&](double t, double y) {
    tr.events.push_back({t, EventKind::Extinction, 0, y});
    tr.absorbed = true;
    tr.t_absorption = t;
  };

  // An empty start is already absorbed; there is no population event to log.
  if (s.n == 0) {
    tr.absorbed = true;
    tr.t_absorption = s.t;
  }

  while (!tr.absorbed && s.t < t_end) {
    const JumpOutcome j = next_jump(p, s, rng, opt.ode_tol, t_end, opt.sample_dt ? &path : nullptr);
    tr.y_max_alive = std::max(tr.y_max_alive, j.y_max);
    tr.y_min_alive = std::min(tr.y_min_alive, j.y_min);
    if (opt.sample_dt) {
      for (double ts = sample_time(sample_k); ts < j.t || (j.kind == JumpKind::None && ts <= j.t);
           ts = sample_time(++sample_k))
        tr.samples.push_back({ts, s.n, path.at(ts)});
    }
    if (j.t_hit_zero) tr.events.push_back({*j.t_hit_zero, EventKind::NutrientHitZero, s.n, 0.0});

    const bool was_pinned = j.y == 0.0 && nutrient_sticks_at_zero(p, s.n);
    s.t = j.t;
    s.y = j.y;
    switch (j.kind) {
      case JumpKind::None:
        break;
      case JumpKind::HardExtinction:
        s.n = 0;
        absorb(s.t, s.y);
        break;
      case JumpKind::Birth:
        ++s.n;
        tr.events.push_back({s.t, EventKind::Birth, s.n, s.y});
        break;
      case JumpKind::Death:
      case JumpKind::Washout:
        --s.n;
        tr.events.push_back(
            {s.t, j.kind == JumpKind::Death ? EventKind::Death : EventKind::Washout, s.n, s.y});
        // An empty start is already absorbed; there is no population event to log.
  if (s.n == 0) {
    tr.absorbed = true;
    tr.t_absorption = s.t;
  }
        break;
    }
    if (j.kind == JumpKind::None) break;
    if (!tr.absorbed && was_pinned && !nutrient_sticks_at_zero(p, s.n))
      tr.events.push_back({s.t, EventKind::NutrientLeaveZero, s.n, 0.0});
  }

  if (opt.sample_dt && tr.absorbed) {
    // After extinction the nutrient relaxes along the n = 0 flow.
    const double t0 = s.t, y0 = s.y;
    for (double ts = sample_time(sample_k); ts <= t_end; ts = sample_time(++sample_k))
      tr.samples.push_back({ts, 0, flow(p, 0, y0, std::max(ts - t0, 0.0))});
  }
  return tr;
}

std::vector<CoupledPoint> simulate_domination_coupling(const ChemostatParams& p,
                                                       const HybridState& initial, double horizon,
                                                       std::uint64_t seed, double ode_tol) {
  if (p.death.infinite_at_zero())
    throw std::invalid_argument("domination coupling needs a finite d(0)");
  if (initial.y > p.y_star || initial.y < 0.0 || initial.n < 0)
    throw std::invalid_argument("domination coupling needs 0 <= y <= y* and n >= 0");
  const double b_star = p.birth(p.y_star);
  const double d_star = p.death(p.y_star).value();
  const double mark_rate = b_star + p.D + p.death(0.0).value();

  CounterRng rng(seed, 0);
  std::int64_t n = initial.n, m = initial.n;
  double y = initial.y, t = initial.t;
  const double t_end = initial.t + horizon;
  std::vector<CoupledPoint> out{{t, n, m, y}};
  while (m > 0 && t < t_end) {
    const double dt = rng.exponential() / (static_cast<double>(m) * mark_rate);
    if (t + dt >= t_end) {
      y = flow(p, n, y, t_end - t, ode_tol);
      out.push_back({t_end, n, m, y});
      break;
    }
    y = flow(p, n, y, dt, ode_tol);
    t += dt;
    const bool marks_n = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(m))) < n;
    const double theta = rng.uniform() * mark_rate;
    if (theta < b_star) {
      ++m;
      if (marks_n && theta < p.birth(y)) ++n;
    } else if (theta < b_star + p.D + d_star) {
      --m;
      if (marks_n) --n;
    } else if (marks_n && theta < b_star + p.D + p.death(y).value()) {
      --n;
    }
    out.push_back({t, n, m, y});
  }
  return out;
}

}  // namespace chemostat
