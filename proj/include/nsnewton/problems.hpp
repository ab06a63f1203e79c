#pragma once

// Problem corpus: worked examples with exact derivative objects, smooth
// baselines and synthetic piecewise-affine families.

#include "nsnewton/map.hpp"
#include "nsnewton/types.hpp"
#include "nsnewton/value_set.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace nsnewton {

namespace staircase {

/// Index k with x in (2^{-k}, 2^{-(k-1)}] for 0 < x <= 1.
int interval_index(double x);
double upper_slope(int k);  // 1 + 2^{-2k}
double lower_slope(int k);  // 1 - 2^{-k} - 2^{-2k}

/// Continuous odd zigzag between the lines (1-2^{-k})x + 2^{-2k} and x.
/// DomainExit for |x| > 1.
double eval(double x);
DerivativeValueSet dirderiv(double x, double d);
/// Slopes of the segments adjacent to x, tagged 2k (upper slope) or
/// 2k+1 (lower slope) of interval k; id 0 is the limit slope 1 at x = 0.
std::vector<Generator> bsub(double x);

MapPtr make_map();

}  // namespace staircase

struct AffAbsData {
  Matrix a;
  Matrix b;
  Vector rhs;
  Vector root;
};

/// H(x) = Ax + B|x| - rhs with A = I + 0.3 G/sqrt(n), B = 0.1 G'/sqrt(n)
/// from a seeded Gaussian stream; root has half of its entries zero.
AffAbsData affabs_data(int n, std::uint64_t seed = 0xC0FFEE);

struct ProblemSpec {
  std::string id;
  MapPtr map;
  std::vector<Vector> known_roots;
  std::vector<Vector> recommended_x0;
  /// Points where the map is not differentiable (a finite sample for
  /// problems with infinitely many).
  std::vector<Vector> kink_points;
  bool smooth = false;
  bool semismooth = false;
  /// Limiting subdifferential of z*H at x for 1-D closed forms; empty when
  /// no table is registered.
  std::function<DerivativeValueSet(double x, double z)> scalarized;
  /// Path approaching the first known root for the first-order residual test.
  std::vector<Vector> h2_path;
  std::string notes;
};

/// The registered corpus. Built once; registration checks the roots and
/// compares closed forms against the sampling oracle.
const std::vector<ProblemSpec>& corpus();
const ProblemSpec& find_problem(const std::string& id);
std::vector<std::string> problem_ids();

/// Runs the registration checks on a spec; throws Error on violation.
void validate_problem(const ProblemSpec& spec);

}  // namespace nsnewton
