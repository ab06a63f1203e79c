#pragma once

#include "nsnewton/types.hpp"

#include <string>
#include <variant>
#include <vector>

namespace nsnewton {

struct Singleton {
  Vector value;
};

struct FiniteSet {
  std::vector<Vector> values;
};

/// Closed segment [a, b]; endpoints must differ.
struct Segment {
  Vector a;
  Vector b;
};

/// Convex hull of the vertex list (no facet description is kept).
struct Polytope {
  std::vector<Vector> vertices;
};

/// How a sampled set was produced, so tolerances can be reconstructed.
struct SampleRecord {
  double t_max = 0.0;
  double t_min = 0.0;
  int levels = 0;
  int substeps = 0;
  int directions = 0;
  double cluster_radius = 0.0;
  std::size_t raw_count = 0;
};

struct Sampled {
  std::vector<Vector> points;
  SampleRecord record;
};

/// A representable subset of R^m: values of graphical derivatives,
/// B-subdifferential / Clarke images, or sampled approximations of them.
class DerivativeValueSet {
 public:
  enum class Kind { Singleton, FiniteSet, Segment, Polytope, Sampled };
  using Storage = std::variant<Singleton, FiniteSet, Segment, Polytope, Sampled>;

  static DerivativeValueSet singleton(Vector v);
  static DerivativeValueSet finite(std::vector<Vector> values);
  static DerivativeValueSet segment(Vector a, Vector b);
  static DerivativeValueSet polytope(std::vector<Vector> vertices);
  static DerivativeValueSet sampled(std::vector<Vector> points, SampleRecord record);

  /// Builds the tightest exact representation of a finite point list:
  /// Singleton when all points agree within `tol`, FiniteSet otherwise.
  static DerivativeValueSet from_points(const std::vector<Vector>& points,
                                        double tol = kTolSet);
  /// Convex hull of a point list, collapsed to Singleton / Segment when the
  /// points allow it (always a Segment or Singleton in one dimension).
  static DerivativeValueSet hull(const std::vector<Vector>& points,
                                 double tol = kTolSet);

  Kind kind() const;
  const Storage& storage() const { return storage_; }
  bool is_exact() const { return kind() != Kind::Sampled; }
  bool is_convex() const;
  int dim() const;

  /// Points that generate the set: the value, the finite members, the
  /// endpoints, the vertices or the samples.
  const std::vector<Vector>& generators() const { return generators_; }

  /// Euclidean distance from p to the set (convex hull for Segment/Polytope).
  double distance_to(const Vector& p) const;
  /// Largest pairwise distance between generators.
  double diameter() const;
  bool contains(const Vector& p, double tol = kTolSet) const {
    return distance_to(p) <= tol;
  }

  std::string describe() const;

 private:
  explicit DerivativeValueSet(Storage s);
  Storage storage_;
  std::vector<Vector> generators_;
};

std::string to_string(DerivativeValueSet::Kind kind);

/// sup over p in `a` of dist(p, b). Convex members of `a` are discretised
/// along their edges when `b` is not convex.
double excess(const DerivativeValueSet& a, const DerivativeValueSet& b);
double hausdorff(const DerivativeValueSet& a, const DerivativeValueSet& b);

/// Minimum-norm point of the convex hull of `points` (Wolfe's algorithm).
Vector min_norm_point(const std::vector<Vector>& points);
/// Distance from p to conv(points).
double distance_to_hull(const Vector& p, const std::vector<Vector>& points);

/// Greedy leader clustering; representatives are cluster centroids.
std::vector<Vector> cluster_points(const std::vector<Vector>& points, double radius);

}  // namespace nsnewton
