#pragma once

// Newton iterations for H(x) = 0 driven by the graphical derivative, the
// B-subdifferential, the Clarke Jacobian or the directional derivative.

#include "nsnewton/map.hpp"
#include "nsnewton/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace nsnewton {

enum class Method { Graphical, Bsub, Clarke, Bdiff };

std::string to_string(Method method);
/// Parses "graphical", "bsub", "clarke" or "bdiff"; InvalidArgument otherwise.
Method parse_method(const std::string& name);

struct SolverConfig {
  Method method = Method::Graphical;
  double tol_residual = 1e-10;
  double tol_step = 1e-12;
  int max_iter = 50;
  /// Relative tolerance for the membership -H(x) in DH(x)(d).
  double eta = 1e-8;

  void validate() const;
};

enum class Termination { Converged, MaxIter, SubproblemFailure, Diverged };
std::string to_string(Termination t);
Termination parse_termination(const std::string& name);

struct SubproblemResult {
  Vector direction;
  /// Generator id the direction came from; -1 for the fallback search.
  int element_id = -1;
  /// dist(-H(x), DH(x)(d)) for the graphical and bdiff variants, |Ad + H(x)|
  /// for the semismooth ones.
  double membership_residual = 0.0;
  double rcond = 1.0;
  /// Candidate generators rejected as numerically singular.
  std::vector<std::pair<int, double>> singular_candidates;
};

SubproblemResult solve_subproblem_graphical(const NonsmoothMap& map, const Vector& x,
                                            const SolverConfig& config);
/// `source` is Method::Bsub or Method::Clarke.
SubproblemResult solve_subproblem_semismooth(const NonsmoothMap& map, const Vector& x,
                                             const SolverConfig& config, Method source);
SubproblemResult solve_subproblem_bdiff(const NonsmoothMap& map, const Vector& x,
                                        const SolverConfig& config);

struct SolveTrace {
  Method method = Method::Graphical;
  std::vector<Vector> iterates;
  std::vector<Vector> directions;
  std::vector<double> residual_norms;
  std::vector<double> step_norms;
  std::vector<int> element_ids;
  std::vector<double> membership_residuals;
  Termination termination = Termination::MaxIter;
  std::string message;
  /// Filled when a root was supplied.
  std::vector<double> errors;
  std::vector<double> ratios;

  int iterations() const { return static_cast<int>(directions.size()); }
  const Vector& final_iterate() const { return iterates.back(); }
};

/// Iterates x^{k+1} = x^k + d^k. Never throws for failures inside the loop;
/// they end up in the termination reason. DomainExit if x0 is outside the
/// domain.
SolveTrace run_newton(const NonsmoothMap& map, const Vector& x0, const SolverConfig& config,
                      const std::optional<Vector>& root = std::nullopt);

inline constexpr double kSuperlinearThreshold = 0.1;

struct RateDiagnostics {
  /// Least-squares slope of log e_{k+1} against log e_k; NaN if unavailable.
  double order = 0.0;
  std::vector<double> ratios;
  double final_ratio = 0.0;
  bool superlinear = false;
  /// The iteration hit the root to machine precision.
  bool finite_termination = false;
  int valid_errors = 0;
};

/// InsufficientData unless the trace converged and either terminated finitely
/// or has at least four errors above 10 machine epsilons.
RateDiagnostics rate_diagnostics(const SolveTrace& trace, const Vector& root);
RateDiagnostics rate_diagnostics(const std::vector<double>& errors, double root_scale = 1.0);

}  // namespace nsnewton
