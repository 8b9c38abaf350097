#include <doctest.h>

#include "chemostat/verify.hpp"

using namespace chemostat;

TEST_CASE("pure-death config passes the analytic checks") {
  RunConfig c;
  c.params.birth = BirthLaw::monod(0.0, 1.0);
  c.params.death = DeathLaw::constant(0.5);
  VerifyOptions o;
  o.scale = 0.2;
  o.only = {1, 3, 5, 7, 10};
  const auto rep = verify(c, o);
  REQUIRE(rep.checks.size() == 5);
  for (const auto& r : rep.checks) CHECK_MESSAGE(r.status != CheckStatus::Fail, rep.to_text());
  CHECK(rep.checks[2].status == CheckStatus::Pass);
  CHECK(rep.checks[3].status == CheckStatus::Skip);
  CHECK(rep.all_passed());
}

TEST_CASE("desk deterministic checks pass at reduced scale") {
  VerifyOptions o;
  o.scale = 0.1;
  o.only = {2, 4, 7, 8, 11, 12};
  const auto rep = verify(RunConfig{}, o);
  REQUIRE(rep.checks.size() == 6);
  for (const auto& r : rep.checks) CHECK_MESSAGE(r.status == CheckStatus::Pass, rep.to_text());
  CHECK(rep.to_text().find("[PASS] 04") != std::string::npos);
}
