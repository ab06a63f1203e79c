#include "nsnewton/problems.hpp"
#include "nsnewton/regularity.hpp"

#include <doctest.h>

using namespace nsnewton;

namespace {

const NonsmoothMap& map_of(const char* id) { return *find_problem(id).map; }

NonsmoothMap pieces_x_and_zero() {
  return build_piecewise(
      {SmoothPiece{0, [](const Vector& x) { return Vector(0.0 * x); },
                   [](const Vector&) { return Matrix::Zero(1, 1); }},
       SmoothPiece{1, [](const Vector& x) { return x; },
                   [](const Vector&) { return Matrix::Identity(1, 1); }}},
      [](const Vector& x) {
        std::vector<int> ids;
        if (x[0] <= 0.0) ids.push_back(0);
        if (x[0] >= 0.0) ids.push_back(1);
        return ids;
      },
      1, 1, Box::cube(1, -1, 1));
}

// Generic 2-D map with prescribed B-subdifferential at the origin.
NonsmoothMap two_jacobians(const Matrix& a, const Matrix& b) {
  NonsmoothMap::Hooks h;
  h.eval = [a, b](const Vector& x) { return Vector(x[0] >= 0 ? a * x : b * x); };
  h.dirderiv = [a, b](const Vector& x, const Vector& d) {
    const bool right = x[0] > 0 || (x[0] == 0 && d[0] >= 0);
    return DerivativeValueSet::singleton(right ? a * d : b * d);
  };
  h.bsub = [a, b](const Vector& x) {
    std::vector<Generator> g;
    if (x[0] <= 0) g.push_back({0, b});
    if (x[0] >= 0) g.push_back({1, a});
    return g;
  };
  Capabilities c;
  c.lipschitz = c.directionally_differentiable = c.piecewise_c1 = c.has_analytic_dirderiv = true;
  return NonsmoothMap("two", 2, 2, Box::cube(2, -1, 1), c, h);
}

}  // namespace

TEST_CASE("B-subdifferential nonsingularity") {
  CHECK(check_bsub_nonsingular(map_of("abs1d"), vec({0.0})).nonsingular);
  CHECK(check_bsub_nonsingular(map_of("halfabs"), vec({0.0})).nonsingular);
  const auto z = check_bsub_nonsingular(pieces_x_and_zero(), vec({0.0}));
  CHECK_FALSE(z.nonsingular);
  REQUIRE(z.witness);
  CHECK(z.witness->matrix(0, 0) == 0.0);
}

TEST_CASE("Clarke nonsingularity") {
  CHECK(check_clarke_nonsingular(map_of("abs1d"), vec({0.0})).verdict == ClarkeVerdict::CertifiedIrregular);
  CHECK(check_clarke_nonsingular(map_of("halfabs"), vec({0.0})).verdict == ClarkeVerdict::CertifiedRegular);
  const Matrix id = Matrix::Identity(2, 2);
  CHECK(check_clarke_nonsingular(two_jacobians(id, id), vec({0.0, 0.0})).verdict ==
        ClarkeVerdict::CertifiedRegular);
  // det I = 1 and det diag(1,-1) = -1: the segment crosses a singular matrix.
  Matrix flip = id;
  flip(1, 1) = -1.0;
  const auto r = check_clarke_nonsingular(two_jacobians(id, flip), vec({0.0, 0.0}));
  CHECK(r.verdict == ClarkeVerdict::CertifiedIrregular);
  CHECK(r.method == "determinant-sign-change");
  REQUIRE(r.witness);
  CHECK(std::abs(r.witness->determinant()) < 1e-12);
  // Same determinant sign, well conditioned hull: sampling certificate.
  Matrix rot(2, 2);
  rot << 1.0, 0.3, -0.3, 1.0;
  const auto s = check_clarke_nonsingular(two_jacobians(id, rot), vec({0.0, 0.0}));
  CHECK(s.verdict == ClarkeVerdict::CertifiedRegular);
  CHECK(s.method == "sampled-hull");
}

TEST_CASE("Thibault condition") {
  CHECK(check_thibault_condition(map_of("halfabs"), vec({0.0})).holds);
  CHECK(check_thibault_condition(map_of("linear2x"), vec({0.4})).holds);
  const auto ab = check_thibault_condition(map_of("abs1d"), vec({0.0}));
  CHECK_FALSE(ab.holds);
  REQUIRE(ab.witness_value);
  CHECK(std::abs((*ab.witness_value)[0]) < 1e-3);
  CHECK_THROWS_AS(check_thibault_condition(map_of("xsin1x"), vec({0.0})), CapabilityMissing);
}

TEST_CASE("scalarized coderivative tables") {
  const auto p1 = scalarized_coderivative_1d("abs1d", 0.0, 1.0);
  CHECK(hausdorff(p1, DerivativeValueSet::segment(vec({-1.0}), vec({1.0}))) == 0.0);
  CHECK(p1.kind() == DerivativeValueSet::Kind::Segment);
  const auto m1 = scalarized_coderivative_1d("abs1d", 0.0, -1.0);
  CHECK(m1.kind() == DerivativeValueSet::Kind::FiniteSet);
  CHECK(hausdorff(m1, DerivativeValueSet::finite({vec({-1.0}), vec({1.0})})) == 0.0);
  const auto s = scalarized_coderivative_1d("abs1d", 0.5, 1.0);
  CHECK(s.kind() == DerivativeValueSet::Kind::Singleton);
  CHECK(s.generators()[0][0] == 1.0);
  CHECK_THROWS_AS(scalarized_coderivative_1d("quad2d", 0.0, 1.0), NotRegistered);
  // Property: the table scales with z > 0.
  for (double z : {0.5, 2.0, 3.0}) {
    const auto t = scalarized_coderivative_1d("halfabs", 0.0, z);
    CHECK(hausdorff(t, DerivativeValueSet::segment(vec({0.5 * z}), vec({1.5 * z}))) < 1e-15);
  }
}

TEST_CASE("combined report") {
  const auto& p = find_problem("abs1d");
  const auto r = regularity_report(*p.map, vec({0.0}), &p);
  CHECK(r.bsub.nonsingular);
  CHECK(r.clarke.verdict == ClarkeVerdict::CertifiedIrregular);
  CHECK(r.label == "NecessaryHolds-but-SufficientFails");
  CHECK(r.scalarized.size() == 2);
  const auto& h = find_problem("halfabs");
  CHECK(regularity_report(*h.map, vec({0.0}), &h).overall == Overall::SufficientHolds);
  CHECK(regularity_report(pieces_x_and_zero(), vec({0.0})).overall == Overall::NecessaryFailed);
}
