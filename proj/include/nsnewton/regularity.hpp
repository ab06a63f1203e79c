#pragma once

// Pointwise regularity diagnostics: nonsingularity of the B-subdifferential
// and of the Clarke Jacobian, the Thibault-derivative condition, and exact
// scalarized coderivatives for registered 1-D maps.

#include "nsnewton/map.hpp"
#include "nsnewton/problems.hpp"
#include "nsnewton/sampling.hpp"

#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace nsnewton {

struct BsubVerdict {
  bool nonsingular = true;
  double min_rcond = 1.0;
  std::optional<Generator> witness;
};

/// True iff every element of bsub(x) has reciprocal condition above eps_reg.
BsubVerdict check_bsub_nonsingular(const NonsmoothMap& map, const Vector& x);

enum class ClarkeVerdict { CertifiedRegular, CertifiedIrregular, Inconclusive };
std::string to_string(ClarkeVerdict v);

struct ClarkeResult {
  ClarkeVerdict verdict = ClarkeVerdict::Inconclusive;
  /// "exact-interval", "single-element", "determinant-sign-change",
  /// "sampled-singular" or "sampled-hull".
  std::string method;
  double min_rcond = 1.0;
  std::optional<Matrix> witness;
};

/// n = 1 is exact. For n >= 2 a sign change of det along an edge of the
/// hull or a singular sample certifies irregularity; regularity is a
/// sampling certificate (same determinant sign at every vertex and every
/// sampled combination well conditioned).
ClarkeResult check_clarke_nonsingular(const NonsmoothMap& map, const Vector& x,
                                      int n_samples = 10000, std::uint64_t seed = 0xC0FFEE);

struct ThibaultVerdict {
  bool holds = true;
  double min_ratio = std::numeric_limits<double>::infinity();
  std::optional<Vector> witness_direction;
  std::optional<Vector> witness_value;
};

/// Fails when some sampled w in D_T H(x)(z) has |w| < tol_thibault |z|; in
/// 1-D also when the sampled interval straddles zero.
ThibaultVerdict check_thibault_condition(const NonsmoothMap& map, const Vector& x,
                                         const sampling::LimitGrid& grid = {},
                                         std::vector<Vector> directions = {});

/// Registered closed form of the limiting subdifferential of z*H at x.
DerivativeValueSet scalarized_coderivative_1d(const std::string& problem_id, double x, double z);

enum class Overall { NecessaryFailed, SufficientHolds, Inconclusive };
std::string to_string(Overall v);

struct ScalarizedEntry {
  double z = 0.0;
  DerivativeValueSet value;
};

struct RegularityReport {
  Vector point;
  BsubVerdict bsub;
  ClarkeResult clarke;
  ThibaultVerdict thibault;
  std::vector<ScalarizedEntry> scalarized;
  Overall overall = Overall::Inconclusive;
  /// Finer reading of `overall`, e.g. "NecessaryHolds-but-SufficientFails".
  std::string label;
  std::string note;
};

/// Combines the checks. A scalarized table is attached for z = +-1 when the
/// problem registers one.
RegularityReport regularity_report(const NonsmoothMap& map, const Vector& x,
                                   const ProblemSpec* problem = nullptr);

}  // namespace nsnewton
