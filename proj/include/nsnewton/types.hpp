#pragma once

// Core numeric types, tolerances and the error hierarchy shared by every
// module of the nonsmooth Newton library.

#include <Eigen/Dense>

#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace nsnewton {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Set equality / containment for exact objects (Euclidean or Hausdorff).
inline constexpr double kTolSet = 1e-9;
// Finite-difference Jacobian validation.
inline constexpr double kTolFd = 1e-6;
// Comparisons involving sampled sets.
inline constexpr double kTolHausdorff = 1e-3;
// Relative radius used when clustering sampled quotients.
inline constexpr double kTolCluster = 1e-4;
// Difference quotients above this magnitude are treated as blow-up.
inline constexpr double kOverflowGuard = 1e8;
// Reciprocal condition number below which a matrix counts as singular.
inline constexpr double kEpsReg = 1e-12;
// Relative norm below which a sampled Thibault value counts as zero.
inline constexpr double kTolThibault = 1e-6;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class CapabilityMissing : public Error {
 public:
  using Error::Error;
};

class DomainExit : public Error {
 public:
  explicit DomainExit(const std::string& what, Vector point = {})
      : Error(what), point_(std::move(point)) {}
  const Vector& point() const { return point_; }

 private:
  Vector point_;
};

class StitchingViolation : public Error {
 public:
  StitchingViolation(const std::string& what, Vector point, int piece_a,
                     int piece_b, double gap)
      : Error(what),
        point_(std::move(point)),
        piece_a_(piece_a),
        piece_b_(piece_b),
        gap_(gap) {}
  const Vector& point() const { return point_; }
  int piece_a() const { return piece_a_; }
  int piece_b() const { return piece_b_; }
  double gap() const { return gap_; }

 private:
  Vector point_;
  int piece_a_;
  int piece_b_;
  double gap_;
};

class EmptyActivity : public Error {
 public:
  explicit EmptyActivity(const std::string& what, Vector point = {})
      : Error(what), point_(std::move(point)) {}
  const Vector& point() const { return point_; }

 private:
  Vector point_;
};

class Unbounded : public Error {
 public:
  Unbounded(const std::string& what, Vector direction, double scale)
      : Error(what), direction_(std::move(direction)), scale_(scale) {}
  const Vector& direction() const { return direction_; }
  double scale() const { return scale_; }

 private:
  Vector direction_;
  double scale_;
};

class NotRegistered : public Error {
 public:
  using Error::Error;
};

class InsufficientData : public Error {
 public:
  using Error::Error;
};

class SingularElement : public Error {
 public:
  SingularElement(const std::string& what, double rcond)
      : Error(what), rcond_(rcond) {}
  double rcond() const { return rcond_; }

 private:
  double rcond_;
};

class SubproblemFailure : public Error {
 public:
  using Error::Error;
};

class RegionExit : public Error {
 public:
  RegionExit(const std::string& what, int iteration)
      : Error(what), iteration_(iteration) {}
  int iteration() const { return iteration_; }

 private:
  int iteration_;
};

/// Throws InvalidArgument when any entry is NaN or infinite.
void require_finite(const Vector& v, const char* what = "vector");
void require_finite(const Matrix& m, const char* what = "matrix");

/// Builds a checked vector from a brace list.
Vector vec(std::initializer_list<double> values);

/// Axis-aligned validity region of a map.
struct Box {
  Vector lower;
  Vector upper;

  static Box cube(int n, double lo, double hi);
  static Box around(const Vector& center, double radius);

  int dim() const { return static_cast<int>(lower.size()); }
  bool contains(const Vector& x, double slack = 0.0) const;
  Vector center() const { return 0.5 * (lower + upper); }
  Vector width() const { return upper - lower; }
  /// Shrinks every side by `fraction` of its width on both ends.
  Box shrunk(double fraction) const;
  Box intersect(const Box& other) const;
};

/// Reciprocal 2-norm condition number, 0 for exactly singular input.
double reciprocal_condition(const Matrix& a);

}  // namespace nsnewton
