#include "nsnewton/types.hpp"

#include <algorithm>
#include <cmath>

namespace nsnewton {

void require_finite(const Vector& v, const char* what) {
  if (!v.allFinite()) {
    throw InvalidArgument(std::string(what) + " has non-finite entries");
  }
}

void require_finite(const Matrix& m, const char* what) {
  if (m.rows() == 0 || m.cols() == 0) {
    throw InvalidArgument(std::string(what) + " has an empty dimension");
  }
  if (!m.allFinite()) {
    throw InvalidArgument(std::string(what) + " has non-finite entries");
  }
}

Vector vec(std::initializer_list<double> values) {
  Vector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v[i++] = x;
  require_finite(v);
  return v;
}

Box Box::cube(int n, double lo, double hi) {
  return Box{Vector::Constant(n, lo), Vector::Constant(n, hi)};
}

Box Box::around(const Vector& center, double radius) {
  return Box{center.array() - radius, center.array() + radius};
}

bool Box::contains(const Vector& x, double slack) const {
  if (x.size() != lower.size()) return false;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (!(x[i] >= lower[i] - slack && x[i] <= upper[i] + slack)) return false;
  }
  return true;
}

Box Box::shrunk(double fraction) const {
  const Vector w = width();
  return Box{lower + fraction * w, upper - fraction * w};
}

Box Box::intersect(const Box& other) const {
  return Box{lower.cwiseMax(other.lower), upper.cwiseMin(other.upper)};
}

double reciprocal_condition(const Matrix& a) {
  if (a.rows() == 1 && a.cols() == 1) return a(0, 0) == 0.0 ? 0.0 : 1.0;
  Eigen::JacobiSVD<Matrix> svd(a);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s[0] == 0.0) return 0.0;
  return s[s.size() - 1] / s[0];
}

}  // namespace nsnewton
