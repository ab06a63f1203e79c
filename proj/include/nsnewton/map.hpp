#pragma once

// Nonsmooth map abstraction with capability-gated derivative queries, and
// the piecewise-C1 builder from which analytic derivative objects follow.

#include "nsnewton/types.hpp"
#include "nsnewton/value_set.hpp"

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace nsnewton {

using EvalFn = std::function<Vector(const Vector&)>;
using JacobianFn = std::function<Matrix(const Vector&)>;

struct Capabilities {
  bool lipschitz = false;
  bool directionally_differentiable = false;
  bool piecewise_c1 = false;
  bool has_analytic_dirderiv = false;
};

/// A candidate linear model A for the Newton subproblems, tagged with the
/// piece (or element) it came from.
struct Generator {
  int id = 0;
  Matrix matrix;
};

struct SmoothPiece {
  int id = 0;
  EvalFn eval;
  JacobianFn jacobian;
};

/// Returns the ids of the pieces that are essentially active at x: x lies in
/// the closure of the interior of their activity region.
using ActivityFn = std::function<std::vector<int>(const Vector&)>;

class NonsmoothMap {
 public:
  struct Hooks {
    EvalFn eval;
    std::function<DerivativeValueSet(const Vector& x, const Vector& d)> dirderiv;
    std::function<std::vector<Generator>(const Vector& x)> bsub;
    std::function<std::vector<Generator>(const Vector& x)> clarke_vertices;
    /// Candidate linear models for the graphical subproblem. Falls back to
    /// bsub when unset.
    std::function<std::vector<Generator>(const Vector& x)> newton_generators;
  };

  NonsmoothMap(std::string name, int n, int m, Box domain, Capabilities caps,
               Hooks hooks);

  const std::string& name() const { return name_; }
  int input_dim() const { return n_; }
  int output_dim() const { return m_; }
  bool is_square() const { return n_ == m_; }
  const Box& domain() const { return domain_; }
  const Capabilities& capabilities() const { return caps_; }
  const Hooks& hooks() const { return hooks_; }

  /// Evaluates H(x); DomainExit outside the domain box.
  Vector operator()(const Vector& x) const;
  bool in_domain(const Vector& x) const { return domain_.contains(x); }

 private:
  std::string name_;
  int n_;
  int m_;
  Box domain_;
  Capabilities caps_;
  Hooks hooks_;
};

using MapPtr = std::shared_ptr<const NonsmoothMap>;

struct PiecewiseOptions {
  std::string name = "piecewise";
  /// Allowed jump between active pieces at activity boundaries.
  double tol_stitch = 1e-9;
  /// Uniform points per axis for the validation grid (n <= 2); random
  /// points are used above that.
  int grid_points = 401;
  int random_points = 400;
  bool validate = true;
};

/// Assembles a NonsmoothMap from C1 selection pieces. Checks each Jacobian
/// against centred differences and continuity across every activity
/// boundary met on a sample grid of `domain`.
NonsmoothMap build_piecewise(std::vector<SmoothPiece> pieces, ActivityFn active,
                             int n, int m, Box domain,
                             const PiecewiseOptions& options = {});

/// Directional-derivative value set DH(x)(d): exact where an analytic hook
/// exists. CapabilityMissing otherwise (see sampling::dirderiv_or_sample).
DerivativeValueSet dirderiv_set(const NonsmoothMap& map, const Vector& x,
                                const Vector& d);

/// B-subdifferential elements, ordered by piece id.
std::vector<Matrix> bsub(const NonsmoothMap& map, const Vector& x);
std::vector<Generator> bsub_generators(const NonsmoothMap& map, const Vector& x);

/// Vertices of Clarke's generalized Jacobian (its convex hull).
std::vector<Generator> clarke_vertices(const NonsmoothMap& map, const Vector& x);

/// Image {A z : A in conv(bsub)} as a polytope of vertices A_i z.
DerivativeValueSet clarke_apply(const NonsmoothMap& map, const Vector& x,
                                const Vector& z);

/// Linear models offered to the graphical Newton subproblem.
std::vector<Generator> newton_generators(const NonsmoothMap& map, const Vector& x);

/// Centred-difference Jacobian used for validation and sampling.
Matrix fd_jacobian(const EvalFn& f, const Vector& x, double h);

/// Removes generators whose matrices repeat an earlier one within tol
/// (Frobenius norm) and sorts by id.
std::vector<Generator> dedup_generators(std::vector<Generator> gens,
                                        double tol = kTolSet);

}  // namespace nsnewton
