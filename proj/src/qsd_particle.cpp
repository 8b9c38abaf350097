#include "chemostat/qsd_particle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "chemostat/parallel.hpp"
#include "chemostat/stats.hpp"

namespace chemostat {

namespace {

// Stream ids: particle i uses stream i + 1, donor draws use kDonorStream.
constexpr std::uint64_t kDonorStream = std::uint64_t{1} << 62;

struct Particle {
  HybridState s;
  JumpOutcome next;
  FlowPath path;
  CounterRng rng{0, 0};
};

// Histogram over (n, cell) plus atoms at y = 0 and an overflow counter.
struct Histogram {
  std::vector<std::vector<double>> cells;
  std::vector<double> atoms;
  double outside = 0.0;
  double total = 0.0;

  Histogram(std::int64_t n_max, std::size_t m)
      : cells(static_cast<std::size_t>(n_max), std::vector<double>(m, 0.0)),
        atoms(static_cast<std::size_t>(n_max), 0.0) {}

  void add(const Discretization& g, std::int64_t n, double y, double w = 1.0) {
    total += w;
    if (n < 1 || n > g.n_max || y > g.y_max() * (1.0 + 1e-9)) {
      outside += w;
    } else if (y == 0.0) {
      atoms[static_cast<std::size_t>(n - 1)] += w;
    } else {
      cells[static_cast<std::size_t>(n - 1)][g.cell_of(y)] += w;
    }
  }
};

struct FvRun {
  std::vector<Histogram> batches;
  std::vector<std::int64_t> batch_resamples;
  std::int64_t resamples = 0;
  std::int64_t resamples_total = 0;
};

FvRun run_fleming_viot(const ChemostatParams& p, std::int64_t m, double t_end, double burn_in,
                       std::span<const HybridState> initial, std::uint64_t seed,
                       const Discretization& grid, const FlemingViotOptions& opt) {
  const auto mu = static_cast<std::size_t>(m);
  const int nb = opt.batches;
  const double window = t_end - burn_in;
  const auto snapshots = static_cast<std::int64_t>(std::floor(window / opt.snapshot_dt));
  if (snapshots < nb) throw std::invalid_argument("fleming_viot: averaging window too short");
  const double batch_len = window / nb;

  FvRun run;
  run.batches.assign(static_cast<std::size_t>(nb), Histogram(grid.n_max, grid.cells()));
  run.batch_resamples.assign(static_cast<std::size_t>(nb), 0);

  std::vector<Particle> ps(mu);
  using Entry = std::pair<double, std::size_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
  auto schedule = [&](std::size_t i) {
    Particle& q = ps[i];
    q.next = next_jump(p, q.s, q.rng, opt.ode_tol, t_end, &q.path);
    if (q.next.kind != JumpKind::None) queue.emplace(q.next.t, i);
  };
  for (std::size_t i = 0; i < mu; ++i) {
    const HybridState& s0 = initial[i % initial.size()];
    if (s0.n < 1) throw std::invalid_argument("fleming_viot: initial states need n >= 1");
    ps[i].s = {s0.n, s0.y, 0.0};
    ps[i].rng = CounterRng(seed, i + 1);
    schedule(i);
  }

  std::int64_t snap = 1;
  auto snapshot_time = [&](std::int64_t k) { return burn_in + static_cast<double>(k) * opt.snapshot_dt; };
  auto take_snapshots = [&](double until) {
    for (; snap <= snapshots && snapshot_time(snap) <= until; ++snap) {
      const double ts = snapshot_time(snap);
      const auto b = std::min<std::size_t>(static_cast<std::size_t>((snap - 1) * nb / snapshots),
                                           static_cast<std::size_t>(nb - 1));
      for (const Particle& q : ps) run.batches[b].add(grid, q.s.n, q.path.at(ts));
    }
  };

  while (!queue.empty()) {
    const auto [t, i] = queue.top();
    queue.pop();
    take_snapshots(t);
    Particle& q = ps[i];
    q.s.t = t;
    q.s.y = q.next.y;
    switch (q.next.kind) {
      case JumpKind::Birth: ++q.s.n; break;
      case JumpKind::Death:
      case JumpKind::Washout: --q.s.n; break;
      case JumpKind::HardExtinction: q.s.n = 0; break;
      case JumpKind::None: break;
    }
    if (q.s.n == 0) {
      CounterRng donor_rng(derive_seed(seed, static_cast<std::uint64_t>(run.resamples_total)),
                           kDonorStream);
      std::size_t j = static_cast<std::size_t>(donor_rng.below(mu - 1));
      if (j >= i) ++j;
      const Particle& donor = ps[j];
      if (donor.s.n < 1) throw AllAbsorbedSimultaneously("donor particle is absorbed");
      q.s.n = donor.s.n;
      q.s.y = std::max(donor.path.at(t), 0.0);
      ++run.resamples_total;
      if (t > burn_in) {
        ++run.resamples;
        const auto b = std::min(static_cast<int>((t - burn_in) / batch_len), nb - 1);
        ++run.batch_resamples[static_cast<std::size_t>(b)];
      }
    }
    schedule(i);
  }
  take_snapshots(t_end);
  return run;
}

}  // namespace

FlemingViotResult fleming_viot(const ChemostatParams& p, std::int64_t m, double t_end,
                               std::span<const HybridState> initial, std::uint64_t seed,
                               const Discretization& grid, const FlemingViotOptions& opt) {
  if (m < 2) throw std::invalid_argument("fleming_viot: need at least 2 particles");
  if (initial.empty()) throw std::invalid_argument("fleming_viot: empty initial law");
  if (opt.batches < 2) throw std::invalid_argument("fleming_viot: need at least 2 batches");
  if (!(opt.snapshot_dt > 0.0)) throw std::invalid_argument("fleming_viot: snapshot_dt must be > 0");

  double burn_in = 0.0;
  if (opt.burn_in) {
    burn_in = *opt.burn_in;
  } else {
    // Pilot: a smaller cloud over a fixed multiple of the washout time.
    const double pilot_end = 20.0 / p.D;
    FlemingViotOptions pilot = opt;
    pilot.burn_in = pilot_end / 2.0;
    const auto r = run_fleming_viot(p, std::min<std::int64_t>(m, 1000), pilot_end, *pilot.burn_in,
                                    initial, derive_seed(seed, ~std::uint64_t{0} - 1), grid, pilot);
    const double rate = static_cast<double>(r.resamples) /
                        ((pilot_end - *pilot.burn_in) * static_cast<double>(std::min<std::int64_t>(m, 1000)));
    if (!(rate > 0.0)) throw std::runtime_error("fleming_viot: pilot run saw no absorption");
    burn_in = 10.0 / rate;
  }
  if (!(burn_in >= 0.0) || !(t_end > burn_in))
    throw std::invalid_argument("fleming_viot: need t_end > burn_in >= 0");

  const FvRun run = run_fleming_viot(p, m, t_end, burn_in, initial, seed, grid, opt);
  const int nb = opt.batches;
  const double md = static_cast<double>(m);
  const double batch_len = (t_end - burn_in) / nb;
  const std::size_t levels = static_cast<std::size_t>(grid.n_max);
  const std::size_t cells = grid.cells();

  FlemingViotResult res;
  res.particles = m;
  res.burn_in = burn_in;
  res.t_end = t_end;
  res.resamples = run.resamples;
  res.resamples_total = run.resamples_total;

  QsdEstimate& est = res.estimate;
  est.method = "fleming-viot";
  est.disc = grid;
  est.kappa.assign(levels, 0.0);
  est.kappa_stderr.assign(levels, 0.0);
  est.density.assign(levels, std::vector<double>(cells, 0.0));
  est.density_stderr.assign(levels, std::vector<double>(cells, 0.0));
  est.atom_at_zero.assign(levels, 0.0);

  // Batch means: each quantity is averaged per batch, then across batches.
  std::vector<double> lam(static_cast<std::size_t>(nb));
  for (int b = 0; b < nb; ++b)
    lam[static_cast<std::size_t>(b)] = static_cast<double>(run.batch_resamples[static_cast<std::size_t>(b)]) / (batch_len * md);
  est.lambda = static_cast<double>(run.resamples) / ((t_end - burn_in) * md);
  est.lambda_stderr = stats::stddev(lam) / std::sqrt(static_cast<double>(nb));

  auto batch_se = [&](auto&& value) {
    std::vector<double> v(static_cast<std::size_t>(nb));
    for (int b = 0; b < nb; ++b) v[static_cast<std::size_t>(b)] = value(run.batches[static_cast<std::size_t>(b)]);
    return std::pair{stats::mean(v), stats::stddev(v) / std::sqrt(static_cast<double>(nb))};
  };
  double total = 0.0, outside = 0.0;
  for (const auto& h : run.batches) {
    total += h.total;
    outside += h.outside;
  }
  res.mass_outside_grid = total > 0.0 ? outside / total : 0.0;

  for (std::size_t k = 0; k < levels; ++k) {
    const auto [kap, kap_se] = batch_se([&](const Histogram& h) {
      double s = h.atoms[k];
      for (double c : h.cells[k]) s += c;
      return s / h.total;
    });
    est.kappa[k] = kap;
    est.kappa_stderr[k] = kap_se;
    est.atom_at_zero[k] = batch_se([&](const Histogram& h) { return h.atoms[k] / h.total; }).first;
    for (std::size_t j = 0; j < cells; ++j) {
      const double w = grid.width(j);
      const auto [u, u_se] = batch_se([&](const Histogram& h) { return h.cells[k][j] / h.total / w; });
      est.density[k][j] = u;
      est.density_stderr[k][j] = u_se;
    }
  }
  return res;
}

ConditionedResult conditioned_ensemble(const ChemostatParams& p,
                                       std::span<const HybridState> initial,
                                       std::span<const double> t_grid, std::int64_t n_paths,
                                       std::uint64_t seed, const Discretization& grid,
                                       unsigned threads, double ode_tol, bool fit) {
  if (n_paths < 1) throw std::invalid_argument("conditioned_ensemble: n_paths must be >= 1");
  if (initial.empty()) throw std::invalid_argument("conditioned_ensemble: empty initial law");
  if (t_grid.empty() || !std::is_sorted(t_grid.begin(), t_grid.end()) || t_grid.front() < 0.0)
    throw std::invalid_argument("conditioned_ensemble: t_grid must be sorted and >= 0");
  for (const auto& s : initial)
    if (s.n < 1) throw std::invalid_argument("conditioned_ensemble: initial states need n >= 1");

  struct Record {
    std::size_t k;
    std::int64_t n;
    double y;
  };
  const auto np = static_cast<std::size_t>(n_paths);
  const double horizon = t_grid.back();
  std::vector<std::vector<Record>> records(np);
  std::vector<double> t_abs(np, std::numeric_limits<double>::infinity());

  parallel_for(np, threads, [&](std::size_t i) {
    CounterRng rng(derive_seed(seed, i), 0);
    HybridState s = initial[i % initial.size()];
    s.t = 0.0;
    FlowPath path;
    std::size_t k = 0;
    while (k < t_grid.size() && t_grid[k] == 0.0) records[i].push_back({k++, s.n, s.y});
    while (k < t_grid.size()) {
      const JumpOutcome j = next_jump(p, s, rng, ode_tol, horizon, &path);
      for (; k < t_grid.size() && (t_grid[k] < j.t || (j.kind == JumpKind::None && t_grid[k] <= j.t)); ++k)
        records[i].push_back({k, s.n, path.at(t_grid[k])});
      if (j.kind == JumpKind::None) break;
      s.t = j.t;
      s.y = j.y;
      if (j.kind == JumpKind::Birth) ++s.n;
      else if (j.kind == JumpKind::HardExtinction) s.n = 0;
      else --s.n;
      if (s.n == 0) {
        t_abs[i] = j.t;
        break;
      }
    }
  });

  ConditionedResult res;
  const std::size_t nk = t_grid.size();
  res.survival.t.assign(t_grid.begin(), t_grid.end());
  res.survival.paths = n_paths;
  res.survival.survivors.assign(nk, 0);
  res.counts.assign(nk, std::vector<std::vector<std::int64_t>>(
                            static_cast<std::size_t>(grid.n_max), std::vector<std::int64_t>(grid.cells(), 0)));
  res.outside.assign(nk, 0);
  res.absorption_times = t_abs;
  for (std::size_t i = 0; i < np; ++i) {
    for (const Record& r : records[i]) {
      ++res.survival.survivors[r.k];
      if (r.n > grid.n_max || r.y > grid.y_max() * (1.0 + 1e-9))
        ++res.outside[r.k];
      else
        ++res.counts[r.k][static_cast<std::size_t>(r.n - 1)][grid.cell_of(r.y)];
    }
  }
  res.survival.S.resize(nk);
  for (std::size_t k = 0; k < nk; ++k)
    res.survival.S[k] = static_cast<double>(res.survival.survivors[k]) / static_cast<double>(n_paths);
  if (!fit) return res;

  std::vector<double> xs, ys;
  for (std::size_t k = 0; k < nk; ++k) {
    const double S = res.survival.S[k];
    if (S >= 0.01 && S <= 0.5 && res.survival.survivors[k] >= 100) {
      xs.push_back(t_grid[k]);
      ys.push_back(std::log(S));
    }
  }
  if (xs.size() < 3) throw WindowEmpty("too few grid points with S in [0.01, 0.5] and >= 100 survivors");
  const auto ls = stats::least_squares(xs, ys);
  res.lambda = -ls.slope;
  res.window_begin = xs.front();
  res.window_end = xs.back();
  // Censored exponential likelihood on the window: events / exposure.
  double exposure = 0.0;
  std::int64_t events = 0;
  for (double ta : t_abs) {
    if (!(ta > res.window_begin)) continue;
    exposure += std::min(ta, res.window_end) - res.window_begin;
    if (ta <= res.window_end) ++events;
  }
  if (events > 0) res.lambda_stderr = static_cast<double>(events) / exposure / std::sqrt(static_cast<double>(events));
  return res;
}

std::vector<HybridState> sample_qsd(const QsdEstimate& est, std::int64_t count, std::uint64_t seed) {
  if (count < 0) throw std::invalid_argument("sample_qsd: count must be >= 0");
  struct Slot {
    std::int64_t n;
    std::ptrdiff_t cell;  // -1 for the atom at y = 0
  };
  std::vector<Slot> slots;
  std::vector<double> cdf;
  double acc = 0.0;
  for (std::int64_t n = 1; n <= est.n_max(); ++n) {
    const auto k = static_cast<std::size_t>(n - 1);
    if (k < est.atom_at_zero.size() && est.atom_at_zero[k] > 0.0) {
      acc += est.atom_at_zero[k];
      slots.push_back({n, -1});
      cdf.push_back(acc);
    }
    for (std::size_t j = 0; j < est.disc.cells(); ++j) {
      const double w = est.mass(n, j);
      if (w <= 0.0) continue;
      acc += w;
      slots.push_back({n, static_cast<std::ptrdiff_t>(j)});
      cdf.push_back(acc);
    }
  }
  if (slots.empty()) throw std::invalid_argument("sample_qsd: estimate carries no mass");

  CounterRng rng(seed, 0);
  std::vector<HybridState> out(static_cast<std::size_t>(count));
  for (auto& s : out) {
    const double u = rng.uniform() * acc;
    auto idx = static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
    idx = std::min(idx, slots.size() - 1);
    s.n = slots[idx].n;
    if (slots[idx].cell < 0) {
      s.y = 0.0;
    } else {
      const auto j = static_cast<std::size_t>(slots[idx].cell);
      s.y = est.disc.nodes[j] + rng.uniform_pos() * est.disc.width(j);
    }
    s.t = 0.0;
  }
  return out;
}

}  // namespace chemostat
