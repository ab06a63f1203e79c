#pragma once

// Brute-force approximations of the limit-based derivative objects. These
// routines only evaluate H; they never consult the analytic hooks, so they
// serve as an independent oracle for the map_model answers.

#include "nsnewton/map.hpp"
#include "nsnewton/types.hpp"
#include "nsnewton/value_set.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace nsnewton::sampling {

/// Discretisation of "t -> 0" (geometric levels t0 * sigma^i) and "h -> z"
/// (perturbations of z on spheres of radius t).
struct LimitGrid {
  double t0 = 1e-2;
  double sigma = 0.5;
  int depth = 30;
  /// Levels [tail_start, depth] approximate the limit.
  int tail_start = 15;
  /// Geometric sub-levels inserted between consecutive levels.
  int substeps = 16;
  /// Levels with t*|z| below noise_floor * (|x| + |H(x)|) are dropped.
  double noise_floor = 1e-8;
  /// Base-point offsets per direction for Thibault sampling.
  int offsets = 41;
  /// Extra pseudo-random unit directions.
  int random_directions = 8;
  std::uint64_t seed = 0xC0FFEE;

  /// Throws InvalidArgument unless 0 < sigma < 1, depth >= 8 and
  /// t0 * sigma^depth >= 1e-13.
  void validate() const;
  double level(int i) const;
  /// Step sizes for levels [from, to], `substeps` per level, decreasing.
  std::vector<double> steps(int from, int to, int substeps) const;
};

/// Unit directions used by the samplers in R^n: +-e_i for n <= 3, then
/// `count` seeded random unit vectors.
std::vector<Vector> probe_directions(int n, int count, std::uint64_t seed);

struct ResidualCurve {
  std::vector<double> scales;
  std::vector<double> residuals;
  /// Least-squares slope of log residual against log scale over the
  /// strictly positive residuals; NaN when fewer than two remain.
  double slope = 0.0;
  /// All residuals are exactly representable zeros.
  bool identically_zero = false;

  void push(double scale, double residual);
  void fit();
  std::size_t size() const { return scales.size(); }
};

/// Cluster points of (H(x+tz)-H(x))/t over the tail levels.
DerivativeValueSet sample_restrictive_derivative(const NonsmoothMap& map, const Vector& x,
                                                 const Vector& z, const LimitGrid& grid = {});

/// Cluster points of (H(x+th)-H(x))/t with h on spheres of radius t around z.
DerivativeValueSet sample_graphical_derivative(const NonsmoothMap& map, const Vector& x,
                                               const Vector& z, const LimitGrid& grid = {});

/// Cluster points of (H(u+tz)-H(u))/t over u -> x, t -> 0.
DerivativeValueSet sample_thibault(const NonsmoothMap& map, const Vector& x,
                                   const Vector& z, const LimitGrid& grid = {});

/// Limits of J(u) z over differentiability points u -> x, with J(u) z taken
/// from centred differences (points where the one-sided quotients disagree
/// are skipped).
DerivativeValueSet sample_bsub_image(const NonsmoothMap& map, const Vector& x,
                                     const Vector& z, const LimitGrid& grid = {});

/// Analytic directional derivative when available, sampled restrictive
/// derivative otherwise.
DerivativeValueSet dirderiv_or_sample(const NonsmoothMap& map, const Vector& x,
                                      const Vector& d, const LimitGrid& grid = {});

struct BoundednessVerdict {
  bool bounded = true;
  double max_quotient = 0.0;
  /// Set when unbounded.
  std::optional<Vector> witness_direction;
  double witness_scale = 0.0;
  /// Fitted exponent p in |quotient| ~ t^{-p} over the tail.
  double growth_exponent = 0.0;
  std::string reason;
};

BoundednessVerdict check_directional_boundedness(const NonsmoothMap& map, const Vector& x,
                                                 const std::vector<Vector>& directions,
                                                 const LimitGrid& grid = {});

struct DifferentiabilityVerdict {
  bool directionally_differentiable = true;
  /// Largest tail diameter of the restrictive quotients over the directions.
  double max_tail_diameter = 0.0;
  std::optional<Vector> witness_direction;
};

/// Flags directions whose restrictive quotients keep oscillating over the
/// tail of the grid (cluster diameter above kTolDirDiff relative).
inline constexpr double kTolDirDiff = 1e-4;
DifferentiabilityVerdict check_directional_differentiability(
    const NonsmoothMap& map, const Vector& x, const std::vector<Vector>& directions,
    const LimitGrid& grid = {});

/// Residual min_{v in DH(x)(xbar-x)} |H(x) - H(xbar) + v| along a path.
ResidualCurve h2_residual_curve(const NonsmoothMap& map, const Vector& xbar,
                                const std::vector<Vector>& path,
                                double tol_root = 1e-12);

enum class SemismoothVerdict { Semismooth, NotSemismooth };

struct SemismoothnessReport {
  SemismoothVerdict verdict = SemismoothVerdict::Semismooth;
  bool not_directionally_differentiable = false;
  ResidualCurve curve;
  /// Final residual divided by scale.
  double final_ratio = 0.0;
  std::optional<Vector> witness_direction;
};

inline constexpr double kTolSemismooth = 1e-5;
SemismoothnessReport semismoothness_test(const NonsmoothMap& map, const Vector& xbar,
                                         const LimitGrid& grid = {});

struct ModulusOptions {
  int centers = 21;
  int x_per_center = 7;
  int y_per_center = 9;
  /// Local neighbourhood radius as a fraction of the region width.
  double local_fraction = 0.05;
  /// Preimage search box: region inflated by this fraction of its width.
  double search_inflation = 0.5;
  int grid_1d = 10000;
  int grid_2d = 160;
};

struct ModulusEstimate {
  bool infinite = false;
  /// Set when the map is not square or n > 2.
  bool unsupported = false;
  double mu = 0.0;
  std::size_t pairs = 0;
  /// Target value with no preimage, when infinite.
  std::optional<Vector> empty_preimage_target;
  std::optional<Vector> witness_x;
};

/// Empirical metric-regularity modulus over a box region.
ModulusEstimate estimate_metric_regularity_modulus(const NonsmoothMap& map, const Box& region,
                                                   const ModulusOptions& options = {});

/// All preimages of y found on the search grid, refined by bisection (1-D)
/// or compass search (2-D).
std::vector<Vector> find_preimages(const NonsmoothMap& map, const Vector& y,
                                   const Box& search, const ModulusOptions& options = {});

}  // namespace nsnewton::sampling
