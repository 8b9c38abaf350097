#include "chemostat/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

namespace chemostat {

namespace {

struct Entry {
  std::string value;
  int line = 0;
};

struct Section {
  int line = 0;
  std::map<std::string, Entry> keys;
};

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

const std::map<std::string, std::vector<std::string>>& schema() {
  static const std::map<std::string, std::vector<std::string>> s = {
      {"model", {"D", "y_star", "R", "eta"}},
      {"birth", {"law", "b_inf", "K", "y", "b"}},
      {"death", {"law", "d", "d0", "c", "sigma", "hard"}},
      {"run", {"seed", "threads", "ode_tol"}},
      {"simulate", {"n0", "y0", "horizon", "paths", "sample_dt", "survival_dt"}},
      {"equilibria", {"n_max", "tol"}},
      {"spectral", {"cells", "n_max", "y_max", "tol", "max_iter"}},
      {"particle",
       {"particles", "t_end", "burn_in", "snapshot_dt", "batches", "paths", "ensemble_dt",
        "ensemble_horizon"}},
  };
  return s;
}

class Reader {
 public:
  Reader(std::map<std::string, Section> sections, std::string source)
      : sections_(std::move(sections)), source_(std::move(source)) {}

  [[noreturn]] void fail_parse(int line, const std::string& msg) const {
    throw ParseError(source_ + ":" + std::to_string(line) + ": " + msg);
  }
  [[noreturn]] void fail_value(int line, const std::string& msg) const {
    throw ValidationError(source_ + ":" + std::to_string(line) + ": " + msg);
  }

  const Entry* find(const std::string& sec, const std::string& key) {
    auto s = sections_.find(sec);
    if (s == sections_.end()) return nullptr;
    auto k = s->second.keys.find(key);
    if (k == s->second.keys.end()) return nullptr;
    return &k->second;
  }
  int line_of(const std::string& sec, const std::string& key) {
    if (const Entry* e = find(sec, key)) return e->line;
    auto s = sections_.find(sec);
    return s == sections_.end() ? 0 : s->second.line;
  }

  double number(const std::string& sec, const std::string& key, double def) {
    const Entry* e = find(sec, key);
    return e ? to_double(*e, sec, key) : def;
  }
  std::int64_t integer(const std::string& sec, const std::string& key, std::int64_t def) {
    const Entry* e = find(sec, key);
    if (!e) return def;
    std::int64_t v = 0;
    const char* end = e->value.data() + e->value.size();
    auto [p, ec] = std::from_chars(e->value.data(), end, v);
    if (ec != std::errc() || p != end) fail_parse(e->line, sec + "." + key + ": expected an integer, got '" + e->value + "'");
    return v;
  }
  bool boolean(const std::string& sec, const std::string& key, bool def) {
    const Entry* e = find(sec, key);
    if (!e) return def;
    if (e->value == "true") return true;
    if (e->value == "false") return false;
    fail_parse(e->line, sec + "." + key + ": expected true or false, got '" + e->value + "'");
  }
  std::string word(const std::string& sec, const std::string& key, const std::string& def) {
    const Entry* e = find(sec, key);
    return e ? e->value : def;
  }
  /// Number, or nullopt when the value equals `none_word`.
  std::optional<double> optional_number(const std::string& sec, const std::string& key,
                                        const std::string& none_word, std::optional<double> def) {
    const Entry* e = find(sec, key);
    if (!e) return def;
    if (e->value == none_word) return std::nullopt;
    return to_double(*e, sec, key);
  }
  std::vector<double> list(const std::string& sec, const std::string& key) {
    const Entry* e = find(sec, key);
    if (!e) fail_parse(line_of(sec, key), sec + "." + key + " is required");
    std::vector<double> out;
    std::stringstream ss(e->value);
    std::string item;
    while (std::getline(ss, item, ',')) {
      Entry tmp{trim(item), e->line};
      out.push_back(to_double(tmp, sec, key));
    }
    return out;
  }

  void require(bool ok, const std::string& sec, const std::string& key, const std::string& msg) {
    if (!ok) fail_value(line_of(sec, key), sec + "." + key + " " + msg);
  }
  /// Keys that belong to the schema but not to the chosen variant.
  void forbid(const std::string& sec, const std::vector<std::string>& keys, const std::string& why) {
    for (const auto& k : keys)
      if (const Entry* e = find(sec, k)) fail_parse(e->line, sec + "." + k + " does not apply to " + why);
  }

 private:
  double to_double(const Entry& e, const std::string& sec, const std::string& key) const {
    double v = 0.0;
    const char* end = e.value.data() + e.value.size();
    auto [p, ec] = std::from_chars(e.value.data(), end, v);
    if (ec != std::errc() || p != end)
      fail_parse(e.line, sec + "." + key + ": expected a number, got '" + e.value + "'");
    if (!std::isfinite(v)) fail_value(e.line, sec + "." + key + " must be finite");
    return v;
  }

  std::map<std::string, Section> sections_;
  std::string source_;
};

std::string fmt(double v) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

}  // namespace

RunConfig parse_config_text(const std::string& text, const std::string& source) {
  std::map<std::string, Section> sections;
  std::istringstream in(text);
  std::string raw, current;
  int lineno = 0;
  bool any = false;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = trim(raw);
    if (const auto hash = line.find_first_of("#;"); hash != std::string::npos) line = trim(line.substr(0, hash));
    if (line.empty()) continue;
    any = true;
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError(source + ":" + std::to_string(lineno) + ": unterminated section header");
      current = trim(line.substr(1, line.size() - 2));
      if (!schema().count(current))
        throw ParseError(source + ":" + std::to_string(lineno) + ": unknown section [" + current + "]");
      if (sections.count(current))
        throw ParseError(source + ":" + std::to_string(lineno) + ": duplicate section [" + current + "]");
      sections[current].line = lineno;
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError(source + ":" + std::to_string(lineno) + ": expected 'key = value'");
    if (current.empty())
      throw ParseError(source + ":" + std::to_string(lineno) + ": key outside of any section");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto& allowed = schema().at(current);
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw ParseError(source + ":" + std::to_string(lineno) + ": unknown key '" + key + "' in [" + current + "]");
    if (value.empty())
      throw ParseError(source + ":" + std::to_string(lineno) + ": empty value for '" + key + "'");
    auto& keys = sections[current].keys;
    if (keys.count(key))
      throw ParseError(source + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
    keys[key] = Entry{value, lineno};
  }
  if (!any) throw ParseError(source + ":1: config is empty");

  Reader r(std::move(sections), source);
  RunConfig c;
  ChemostatParams& p = c.params;

  p.D = r.number("model", "D", p.D);
  p.y_star = r.number("model", "y_star", p.y_star);
  p.R = r.number("model", "R", p.R);
  p.eta = r.number("model", "eta", p.eta);
  r.require(p.D > 0.0, "model", "D", "must be > 0");
  r.require(p.y_star > 0.0, "model", "y_star", "must be > 0");
  r.require(p.R > 0.0, "model", "R", "must be > 0");
  r.require(p.eta >= 0.0, "model", "eta", "must be >= 0");

  const std::string birth_law = r.word("birth", "law", "monod");
  if (birth_law == "monod") {
    r.forbid("birth", {"y", "b"}, "law = monod");
    const double b_inf = r.number("birth", "b_inf", 5.0);
    const double K = r.number("birth", "K", 1.0);
    r.require(b_inf >= 0.0, "birth", "b_inf", "must be >= 0");
    r.require(K > 0.0, "birth", "K", "must be > 0");
    p.birth = BirthLaw::monod(b_inf, K);
  } else if (birth_law == "tabulated") {
    r.forbid("birth", {"b_inf", "K"}, "law = tabulated");
    auto ys = r.list("birth", "y");
    auto bs = r.list("birth", "b");
    try {
      p.birth = BirthLaw::tabulated(std::move(ys), std::move(bs));
    } catch (const ValidationError& e) {
      r.fail_value(r.line_of("birth", "b"), e.what());
    }
  } else {
    r.fail_parse(r.line_of("birth", "law"), "birth.law must be monod or tabulated, got '" + birth_law + "'");
  }

  const std::string death_law = r.word("death", "law", "constant");
  if (death_law == "constant") {
    r.forbid("death", {"d0", "c", "sigma"}, "law = constant");
    const double d = r.number("death", "d", 1.0);
    r.require(d > 0.0, "death", "d", "must be > 0");
    p.death = DeathLaw::constant(d);
  } else if (death_law == "singular_power") {
    r.forbid("death", {"d"}, "law = singular_power");
    const double d0 = r.number("death", "d0", 1.0);
    const double cc = r.number("death", "c", 0.0);
    const double sigma = r.number("death", "sigma", 0.0);
    r.require(d0 >= 0.0, "death", "d0", "must be >= 0");
    r.require(cc >= 0.0, "death", "c", "must be >= 0");
    r.require(sigma >= 0.0 && sigma < 1.0, "death", "sigma",
              "must lie in [0, 1): the QSD existence theorem needs limsup_{y->0} y^sigma d(y) < "
              "infinity with sigma < 1");
    r.require(d0 + cc > 0.0, "death", "d0", "and c cannot both be 0 (d must be > 0)");
    p.death = DeathLaw::singular_power(d0, cc, sigma);
  } else {
    r.fail_parse(r.line_of("death", "law"),
                 "death.law must be constant or singular_power, got '" + death_law + "'");
  }
  if (r.boolean("death", "hard", false)) p.death = DeathLaw::hard(p.death);
  p.validate();

  const std::int64_t seed = r.integer("run", "seed", 1);
  r.require(seed >= 0, "run", "seed", "must be >= 0");
  c.run.seed = static_cast<std::uint64_t>(seed);
  const std::int64_t threads = r.integer("run", "threads", 1);
  r.require(threads >= 1 && threads <= 1024, "run", "threads", "must be in [1, 1024]");
  c.run.threads = static_cast<unsigned>(threads);
  c.run.ode_tol = r.number("run", "ode_tol", c.run.ode_tol);
  r.require(c.run.ode_tol > 0.0 && c.run.ode_tol < 1e-2, "run", "ode_tol", "must be in (0, 1e-2)");

  auto& s = c.simulate;
  s.n0 = r.integer("simulate", "n0", s.n0);
  s.y0 = r.number("simulate", "y0", s.y0);
  s.horizon = r.number("simulate", "horizon", s.horizon);
  s.paths = r.integer("simulate", "paths", s.paths);
  s.sample_dt = r.optional_number("simulate", "sample_dt", "none", s.sample_dt);
  s.survival_dt = r.number("simulate", "survival_dt", s.survival_dt);
  r.require(s.n0 >= 0, "simulate", "n0", "must be >= 0");
  r.require(s.y0 >= 0.0, "simulate", "y0", "must be >= 0");
  r.require(s.horizon > 0.0, "simulate", "horizon", "must be > 0");
  r.require(s.paths >= 1, "simulate", "paths", "must be >= 1");
  r.require(!s.sample_dt || *s.sample_dt > 0.0, "simulate", "sample_dt", "must be > 0 or none");
  r.require(s.survival_dt > 0.0, "simulate", "survival_dt", "must be > 0");

  auto& e = c.equilibria;
  e.n_max = r.integer("equilibria", "n_max", e.n_max);
  e.tol = r.number("equilibria", "tol", default_root_tol(p));
  r.require(e.n_max >= 1, "equilibria", "n_max", "must be >= 1");
  r.require(e.tol > 0.0, "equilibria", "tol", "must be > 0");

  auto& sp = c.spectral;
  const std::int64_t cells = r.integer("spectral", "cells", static_cast<std::int64_t>(sp.cells));
  r.require(cells >= 1, "spectral", "cells", "must be >= 1");
  sp.cells = static_cast<std::size_t>(cells);
  sp.n_max = r.integer("spectral", "n_max", sp.n_max);
  r.require(sp.n_max >= 2, "spectral", "n_max", "must be >= 2");
  const std::string top = r.word("spectral", "y_max", "y1");
  if (top == "y1") sp.y_max = GridTop::Y1;
  else if (top == "ystar") sp.y_max = GridTop::YStar;
  else r.fail_parse(r.line_of("spectral", "y_max"), "spectral.y_max must be y1 or ystar, got '" + top + "'");
  sp.tol = r.number("spectral", "tol", sp.tol);
  r.require(sp.tol > 0.0, "spectral", "tol", "must be > 0");
  const std::int64_t max_iter = r.integer("spectral", "max_iter", sp.max_iter);
  r.require(max_iter >= 1 && max_iter <= 1000000, "spectral", "max_iter", "must be in [1, 1e6]");
  sp.max_iter = static_cast<int>(max_iter);

  auto& pa = c.particle;
  pa.particles = r.integer("particle", "particles", pa.particles);
  pa.t_end = r.number("particle", "t_end", pa.t_end);
  pa.burn_in = r.optional_number("particle", "burn_in", "auto", pa.burn_in);
  pa.snapshot_dt = r.number("particle", "snapshot_dt", pa.snapshot_dt);
  const std::int64_t batches = r.integer("particle", "batches", pa.batches);
  pa.paths = r.integer("particle", "paths", pa.paths);
  pa.ensemble_dt = r.number("particle", "ensemble_dt", pa.ensemble_dt);
  pa.ensemble_horizon = r.number("particle", "ensemble_horizon", pa.ensemble_horizon);
  r.require(pa.particles >= 2, "particle", "particles", "must be >= 2");
  r.require(pa.t_end > 0.0, "particle", "t_end", "must be > 0");
  r.require(!pa.burn_in || (*pa.burn_in >= 0.0 && *pa.burn_in < pa.t_end), "particle", "burn_in",
            "must satisfy 0 <= burn_in < t_end");
  r.require(pa.snapshot_dt > 0.0, "particle", "snapshot_dt", "must be > 0");
  r.require(batches >= 2 && batches <= 100000, "particle", "batches", "must be in [2, 1e5]");
  pa.batches = static_cast<int>(batches);
  r.require(pa.paths >= 1, "particle", "paths", "must be >= 1");
  r.require(pa.ensemble_dt > 0.0, "particle", "ensemble_dt", "must be > 0");
  r.require(pa.ensemble_horizon > pa.ensemble_dt, "particle", "ensemble_horizon", "must exceed ensemble_dt");
  return c;
}

RunConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ":0: cannot open config file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path);
}

std::string write_config(const RunConfig& c) {
  const ChemostatParams& p = c.params;
  std::ostringstream o;
  o << "[model]\n"
    << "D = " << fmt(p.D) << "\n"
    << "y_star = " << fmt(p.y_star) << "\n"
    << "R = " << fmt(p.R) << "\n"
    << "eta = " << fmt(p.eta) << "\n\n";

  o << "[birth]\n";
  if (p.birth.kind() == BirthLaw::Kind::Monod) {
    o << "law = monod\nb_inf = " << fmt(p.birth.b_inf()) << "\nK = " << fmt(p.birth.K()) << "\n\n";
  } else {
    auto join = [](const std::vector<double>& v) {
      std::string s;
      for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt(v[i]);
      return s;
    };
    o << "law = tabulated\ny = " << join(p.birth.nodes_y()) << "\nb = " << join(p.birth.nodes_b()) << "\n\n";
  }

  o << "[death]\n";
  if (p.death.kind() == DeathLaw::Kind::Constant) {
    o << "law = constant\nd = " << fmt(p.death.d0()) << "\n";
  } else {
    o << "law = singular_power\nd0 = " << fmt(p.death.d0()) << "\nc = " << fmt(p.death.c())
      << "\nsigma = " << fmt(p.death.sigma()) << "\n";
  }
  o << "hard = " << (p.death.is_hard() ? "true" : "false") << "\n\n";

  o << "[run]\nseed = " << c.run.seed << "\nthreads = " << c.run.threads
    << "\node_tol = " << fmt(c.run.ode_tol) << "\n\n";

  const auto& s = c.simulate;
  o << "[simulate]\nn0 = " << s.n0 << "\ny0 = " << fmt(s.y0) << "\nhorizon = " << fmt(s.horizon)
    << "\npaths = " << s.paths << "\nsample_dt = " << (s.sample_dt ? fmt(*s.sample_dt) : "none")
    << "\nsurvival_dt = " << fmt(s.survival_dt) << "\n\n";

  o << "[equilibria]\nn_max = " << c.equilibria.n_max << "\ntol = " << fmt(c.equilibria.tol) << "\n\n";

  const auto& sp = c.spectral;
  o << "[spectral]\ncells = " << sp.cells << "\nn_max = " << sp.n_max
    << "\ny_max = " << (sp.y_max == GridTop::Y1 ? "y1" : "ystar") << "\ntol = " << fmt(sp.tol)
    << "\nmax_iter = " << sp.max_iter << "\n\n";

  const auto& pa = c.particle;
  o << "[particle]\nparticles = " << pa.particles << "\nt_end = " << fmt(pa.t_end)
    << "\nburn_in = " << (pa.burn_in ? fmt(*pa.burn_in) : "auto") << "\nsnapshot_dt = " << fmt(pa.snapshot_dt)
    << "\nbatches = " << pa.batches << "\npaths = " << pa.paths << "\nensemble_dt = " << fmt(pa.ensemble_dt)
    << "\nensemble_horizon = " << fmt(pa.ensemble_horizon) << "\n";
  return o.str();
}

}  // namespace chemostat
