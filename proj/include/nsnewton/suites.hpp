#pragma once

// Property suites over corpus problems: the inclusion chain between the
// derivative objects and agreement of closed forms with the sampling oracle.

#include "nsnewton/problems.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace nsnewton {

struct InclusionCase {
  Vector x;
  Vector z;
  /// excess(sampled bsub image, sampled Thibault set)
  double bsub_in_thibault = 0.0;
  /// excess(sampled Thibault set, Clarke image)
  double thibault_in_clarke = 0.0;
  /// excess(dirderiv, Clarke image)
  double dirderiv_in_clarke = 0.0;
};

struct InclusionReport {
  std::string problem;
  std::size_t cases = 0;
  double max_bsub_in_thibault = 0.0;
  double max_thibault_in_clarke = 0.0;
  double max_dirderiv_in_clarke = 0.0;
  bool all_hold = true;
  std::optional<InclusionCase> worst;
};

/// Random points in the shrunken domain with every fifth point replaced by a
/// registered kink; unit random directions. CapabilityMissing for
/// non-Lipschitz maps.
InclusionReport inclusion_suite(const ProblemSpec& problem, int samples,
                                std::uint64_t seed = 0xC0FFEE, double tol = kTolHausdorff);

struct OracleReport {
  std::string problem;
  std::size_t cases = 0;
  double max_gap = 0.0;
  std::optional<Vector> worst_x;
  std::optional<Vector> worst_z;
};

/// Hausdorff gap between dirderiv_set and the sampled restrictive derivative
/// at uniformly random (x, z).
OracleReport oracle_equivalence(const ProblemSpec& problem, int samples,
                                std::uint64_t seed = 0xC0FFEE);

/// Uniform points of the box after removing `margin` times its width on
/// each side.
std::vector<Vector> random_points(const Box& box, int count, std::uint64_t seed,
                                  double margin = 0.05);

}  // namespace nsnewton
