#include "nsnewton/suites.hpp"

#include <doctest.h>

using namespace nsnewton;

TEST_CASE("random points stay inside the inset box") {
  const Box b = Box::cube(3, -2.0, 2.0);
  const auto pts = random_points(b, 500, 1);
  for (const auto& p : pts) CHECK(b.shrunk(0.05).contains(p));
  CHECK(random_points(b, 10, 1)[3] == pts[3]);
}

TEST_CASE("inclusion chain on small problems") {
  for (const char* id : {"abs1d", "halfabs", "ncp_min_2d"}) {
    const auto rep = inclusion_suite(find_problem(id), 20);
    CHECK(rep.cases == 20);
    CHECK(rep.all_hold);
  }
  CHECK_THROWS_AS(inclusion_suite(find_problem("xsin1x"), 5), CapabilityMissing);
}

TEST_CASE("closed forms agree with the sampling oracle") {
  for (const char* id : {"abs1d", "staircase", "affabs_2"}) {
    CHECK(oracle_equivalence(find_problem(id), 30).max_gap <= kTolFd);
  }
}
