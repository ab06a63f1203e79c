#include "oracles.hpp"

#include "nsnewton/value_set.hpp"

#include <doctest.h>

#include <random>

using namespace nsnewton;

TEST_CASE("segment distance against the projection formula") {
  const auto s = DerivativeValueSet::segment(vec({-1.0}), vec({1.0}));
  CHECK(s.distance_to(vec({0.3})) == 0.0);
  CHECK(s.distance_to(vec({2.5})) == doctest::Approx(1.5));
  CHECK(s.distance_to(vec({-3.0})) == doctest::Approx(2.0));
}

TEST_CASE("hull collapses in one dimension") {
  const auto h = DerivativeValueSet::hull({vec({0.5}), vec({1.5}), vec({1.0})});
  CHECK(h.kind() == DerivativeValueSet::Kind::Segment);
  CHECK(h.distance_to(vec({0.4})) == doctest::Approx(0.1));
  const auto single = DerivativeValueSet::hull({vec({2.0}), vec({2.0})});
  CHECK(single.kind() == DerivativeValueSet::Kind::Singleton);
}

TEST_CASE("from_points merges within tolerance") {
  const auto a = DerivativeValueSet::from_points({vec({1.0}), vec({1.0 + 1e-12})});
  CHECK(a.kind() == DerivativeValueSet::Kind::Singleton);
  const auto b = DerivativeValueSet::from_points({vec({1.0}), vec({-1.0})});
  CHECK(b.kind() == DerivativeValueSet::Kind::FiniteSet);
  CHECK(b.generators().size() == 2);
}

TEST_CASE("finite set excess and hausdorff match brute force") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Vector> a, b;
    for (int i = 0; i < 6; ++i) a.push_back(vec({g(rng), g(rng)}));
    for (int i = 0; i < 4; ++i) b.push_back(vec({g(rng), g(rng)}));
    const auto sa = DerivativeValueSet::finite(a), sb = DerivativeValueSet::finite(b);
    CHECK(excess(sa, sb) == doctest::Approx(oracle::excess(a, b)).epsilon(1e-12));
    CHECK(hausdorff(sa, sb) ==
          doctest::Approx(std::max(oracle::excess(a, b), oracle::excess(b, a))).epsilon(1e-12));
  }
}

TEST_CASE("triangle distance agrees with the planar oracle") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 200; ++trial) {
    const Vector a = vec({g(rng), g(rng)}), b = vec({g(rng), g(rng)}), c = vec({g(rng), g(rng)});
    const Vector p = 2.0 * vec({g(rng), g(rng)});
    const double want = oracle::distance_to_triangle(p, a, b, c);
    CHECK(distance_to_hull(p, {a, b, c}) == doctest::Approx(want).epsilon(1e-9).scale(1.0));
  }
}

TEST_CASE("min-norm point satisfies the optimality condition") {
  // m minimises |.| over conv(P) iff <p - m, m> >= 0 for every p in P.
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Vector> pts;
    const int n = 2 + trial % 4;
    for (int i = 0; i < 5; ++i) {
      Vector p(n);
      for (int k = 0; k < n; ++k) p[k] = g(rng) + 0.5;
      pts.push_back(p);
    }
    const Vector m = min_norm_point(pts);
    for (const auto& p : pts) CHECK((p - m).dot(m) >= -1e-10);
    CHECK(distance_to_hull(m, pts) <= 1e-9);
  }
}

TEST_CASE("polytope contains its vertex combinations") {
  const auto poly = DerivativeValueSet::polytope({vec({0, 0}), vec({1, 0}), vec({0, 1})});
  CHECK(poly.contains(vec({0.25, 0.25})));
  CHECK_FALSE(poly.contains(vec({0.75, 0.75})));
  CHECK(poly.distance_to(vec({1, 1})) == doctest::Approx(std::sqrt(0.5)));
}

TEST_CASE("clustering keeps separated groups apart") {
  std::vector<Vector> pts;
  for (int i = 0; i < 10; ++i) pts.push_back(vec({1.0 + 1e-7 * i}));
  for (int i = 0; i < 10; ++i) pts.push_back(vec({-1.0 - 1e-7 * i}));
  const auto c = cluster_points(pts, 1e-4);
  REQUIRE(c.size() == 2);
  CHECK(std::abs(std::abs(c[0][0]) - 1.0) < 1e-6);
}

TEST_CASE("excess is zero for a set inside a convex superset") {
  const auto inner = DerivativeValueSet::finite({vec({0.2}), vec({-0.7})});
  const auto outer = DerivativeValueSet::segment(vec({-1.0}), vec({1.0}));
  CHECK(excess(inner, outer) == 0.0);
  CHECK(excess(outer, inner) == doctest::Approx(0.8));
}
