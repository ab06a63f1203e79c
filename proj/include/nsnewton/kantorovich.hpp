#pragma once

// Semi-local convergence check on a ball around the starting point.

#include "nsnewton/map.hpp"
#include "nsnewton/sampling.hpp"
#include "nsnewton/solvers.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace nsnewton {

struct KantorovichOptions {
  int random_pairs = 2000;
  /// Lattice points per axis (n <= 2); all lattice pairs are tested.
  int lattice_1d = 41;
  int lattice_2d = 9;
  /// Direction scales for the vanishing-derivative probe.
  std::vector<double> probe_scales{1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
  int probe_points = 11;
  /// Relative slack for the final inequality, absorbing rounding in mu*|H|.
  double verdict_slack = 1e-9;
  std::uint64_t seed = 0xC0FFEE;
  sampling::ModulusOptions modulus;
  SolverConfig solver;
};

struct AuditRow {
  int k = 0;
  double error = 0.0;
  double bound = 0.0;
  /// bound - error.
  double slack = 0.0;
};

struct KantorovichReport {
  Vector x0;
  double r = 0.0;
  double mu = 0.0;
  bool mu_infinite = false;
  bool mu_unsupported = false;
  double alpha = 0.0;
  /// Same maximum with H(x) - H(y) - v in place of H(y) - H(x) - v.
  double alpha_stated_form = 0.0;
  double h0_norm = 0.0;
  /// (a) metric regularity on the ball with finite modulus.
  bool condition_a = false;
  /// (b) DH(x)(z) -> 0 uniformly as z -> 0.
  bool condition_b = false;
  double max_derivative_ratio = 0.0;
  /// (c) alpha*mu < 1 and mu*|H(x0)| <= r(1 - alpha*mu).
  bool condition_c = false;
  bool pass = false;
  std::string failure;
  std::optional<Vector> alpha_witness_x;
  std::optional<Vector> alpha_witness_y;
  std::optional<Vector> mu_witness;
  /// Solve from x0 with the error estimate checked at every iterate; only
  /// run when the check passes.
  std::optional<SolveTrace> trace;
  std::vector<AuditRow> audit;
  bool audit_holds = false;
};

/// RegionExit when the check passes but the solve leaves the ball.
KantorovichReport kantorovich_check(const NonsmoothMap& map, const Vector& x0, double r,
                                    const KantorovichOptions& options = {});

}  // namespace nsnewton
