#include <doctest.h>

#include <string>

#include "chemostat/config.hpp"

using namespace chemostat;

namespace {

bool same(const RunConfig& a, const RunConfig& b) { return write_config(a) == write_config(b); }

std::string error_of(const std::string& text) {
  try {
    parse_config_text(text, "t.cfg");
  } catch (const std::exception& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("defaults survive a write and parse round trip") {
  const RunConfig c;
  const auto back = parse_config_text(write_config(c));
  CHECK(same(c, back));
  CHECK(write_config(back) == write_config(c));
}

TEST_CASE("a minimal config is completed with defaults") {
  const auto c = parse_config_text("[model]\nD = 2\n");
  CHECK(c.params.D == 2.0);
  CHECK(c.params.y_star == 1.0);
  CHECK(c.spectral.cells == 512);
  CHECK(c.equilibria.tol == doctest::Approx(1e-12));
  CHECK_FALSE(c.particle.burn_in.has_value());
  CHECK(same(c, parse_config_text(write_config(c))));
}

TEST_CASE("non-default values round trip exactly") {
  const std::string text =
      "# comment\n[model]\nD = 0.3\ny_star = 2.5\nR = 0.7\neta = 0.1\n"
      "[birth]\nlaw = tabulated\ny = 0, 0.5, 2\nb = 0, 1.5, 2.25\n"
      "[death]\nlaw = singular_power\nd0 = 0.2\nc = 0.1\nsigma = 0.4\nhard = true\n"
      "[run]\nseed = 99\nthreads = 4\node_tol = 1e-10\n"
      "[simulate]\nsample_dt = 0.25\n"
      "[spectral]\ny_max = ystar\ncells = 300\n"
      "[particle]\nburn_in = 3.5\n";
  const auto c = parse_config_text(text);
  CHECK(c.params.birth.kind() == BirthLaw::Kind::Tabulated);
  CHECK(c.params.birth(0.25) == doctest::Approx(0.75));
  CHECK(c.params.death.is_hard());
  CHECK(c.params.death.sigma() == 0.4);
  CHECK(c.run.seed == 99);
  CHECK(*c.simulate.sample_dt == 0.25);
  CHECK(c.spectral.y_max == GridTop::YStar);
  CHECK(*c.particle.burn_in == 3.5);
  CHECK(same(c, parse_config_text(write_config(c))));
  CHECK(c.equilibria.tol == doctest::Approx(2.5e-12));
}

TEST_CASE("domain errors cite the line and the hypothesis") {
  const auto msg = error_of("[death]\nlaw = singular_power\nd0 = 1\nc = 1\nsigma = 1.2\n");
  CHECK(msg.find("t.cfg:5") != std::string::npos);
  CHECK(msg.find("sigma < 1") != std::string::npos);
  CHECK_THROWS_AS(parse_config_text("[death]\nlaw = singular_power\nsigma = 1.2\n"), ValidationError);
  CHECK_THROWS_AS(parse_config_text("[model]\neta = -0.5\n"), ValidationError);
  CHECK_THROWS_AS(parse_config_text("[model]\nD = 0\n"), ValidationError);
}

TEST_CASE("syntax errors") {
  CHECK_THROWS_AS(parse_config_text(""), ParseError);
  CHECK_THROWS_AS(parse_config_text("\n# only a comment\n"), ParseError);
  CHECK_THROWS_AS(parse_config_text("[model]\nDD = 1\n"), ParseError);
  CHECK_THROWS_AS(parse_config_text("[modle]\n"), ParseError);
  CHECK_THROWS_AS(parse_config_text("[model]\nD = 1\nD = 2\n"), ParseError);
  CHECK_THROWS_AS(parse_config_text("[model]\nD = one\n"), ParseError);
  CHECK_THROWS_AS(parse_config_text("[model]\nD\n"), ParseError);
  CHECK_THROWS_AS(parse_config_text("[death]\nlaw = constant\nsigma = 0.5\n"), ParseError);
  CHECK_THROWS_AS(parse_config("/nonexistent/path.cfg"), ParseError);
  CHECK(error_of("[model]\nD = 1\nfoo = 2\n").find("t.cfg:3") == 0);
}
