#pragma once

// Independent reference computations for the tests. Nothing here calls into
// the library beyond its vector types.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

namespace oracle {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Plain Newton recursion x <- x - J(x)^{-1} F(x), `steps` times.
inline std::vector<Vec> classical_newton(const std::function<Vec(const Vec&)>& f,
                                         const std::function<Mat(const Vec&)>& jac,
                                         Vec x, int steps) {
  std::vector<Vec> out{x};
  for (int k = 0; k < steps; ++k) {
    x = x - jac(x).fullPivLu().solve(f(x));
    out.push_back(x);
  }
  return out;
}

/// Staircase on (0, 1] built geometrically: on (2^-k, 2^-(k-1)] walk left
/// from the anchor, alternating slopes 1+4^-k and 1-2^-k-4^-k, switching
/// whenever the walk meets the other bounding line.
inline double staircase(double x) {
  if (x == 0.0) return 0.0;
  const double sgn = x < 0 ? -1.0 : 1.0;
  x = std::abs(x);
  int k = 1;
  while (x <= std::pow(2.0, -k)) ++k;
  const double e = std::pow(2.0, -k);
  if (k > 50) return sgn * x;
  auto upper = [](double s) { return s; };
  auto lower = [e](double s) { return (1.0 - e) * s + e * e; };
  const double su = 1.0 + e * e, sl = 1.0 - e - e * e;
  double bx = 2.0 * e, by = 2.0 * e;  // anchor on the upper line
  bool on_upper = true;
  for (int j = 0; j < 10000; ++j) {
    const double s = on_upper ? su : sl;
    // Line through (bx, by) with slope s meets the other bound at nx.
    double nx;
    if (on_upper) {
      nx = (by - s * bx - e * e) / ((1.0 - e) - s);
    } else {
      nx = (by - s * bx) / (1.0 - s);
    }
    if (x >= nx || nx <= e) return sgn * (by + s * (x - bx));
    by = on_upper ? lower(nx) : upper(nx);
    bx = nx;
    on_upper = !on_upper;
  }
  return sgn * x;
}

/// max over a of min over b of |a - b| for finite point lists.
inline double excess(const std::vector<Vec>& a, const std::vector<Vec>& b) {
  double worst = 0.0;
  for (const auto& p : a) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& q : b) best = std::min(best, (p - q).norm());
    worst = std::max(worst, best);
  }
  return worst;
}

/// Distance from p to conv{a, b, c} in the plane by dense barycentric search
/// followed by exact edge projections.
inline double distance_to_triangle(const Vec& p, const Vec& a, const Vec& b, const Vec& c) {
  auto seg = [&](const Vec& u, const Vec& v) {
    const Vec d = v - u;
    const double t = std::clamp((p - u).dot(d) / d.squaredNorm(), 0.0, 1.0);
    return (u + t * d - p).norm();
  };
  Mat m(2, 2);
  m.col(0) = b - a;
  m.col(1) = c - a;
  const Vec l = m.fullPivLu().solve(p - a);
  if (l[0] >= 0 && l[1] >= 0 && l[0] + l[1] <= 1) return 0.0;
  return std::min({seg(a, b), seg(b, c), seg(a, c)});
}

/// Least-squares slope of y against x.
inline double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace oracle
