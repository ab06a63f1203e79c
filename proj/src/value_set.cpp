#include "nsnewton/value_set.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace nsnewton {

namespace {

std::string format_vector(const Vector& v) {
  std::ostringstream os;
  os.precision(17);
  os << '[';
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) os << ", ";
    os << v[i];
  }
  os << ']';
  return os.str();
}

std::vector<Vector> dedup(const std::vector<Vector>& points, double tol) {
  std::vector<Vector> out;
  for (const auto& p : points) {
    bool seen = false;
    for (const auto& q : out) {
      if ((p - q).norm() <= tol) {
        seen = true;
        break;
      }
    }
    if (!seen) out.push_back(p);
  }
  return out;
}

void require_same_dim(const std::vector<Vector>& pts, const char* what) {
  if (pts.empty()) throw InvalidArgument(std::string(what) + ": empty point list");
  for (const auto& p : pts) {
    if (p.size() != pts.front().size()) {
      throw InvalidArgument(std::string(what) + ": inconsistent dimensions");
    }
    require_finite(p, what);
  }
}

// Points of a convex set used when the other operand is not convex.
std::vector<Vector> discretise(const DerivativeValueSet& s) {
  const auto& g = s.generators();
  if (s.kind() != DerivativeValueSet::Kind::Segment &&
      s.kind() != DerivativeValueSet::Kind::Polytope) {
    return g;
  }
  const int per_edge = s.kind() == DerivativeValueSet::Kind::Segment ? 2001 : 101;
  std::vector<Vector> out;
  for (std::size_t i = 0; i < g.size(); ++i) {
    for (std::size_t j = i + 1; j < g.size(); ++j) {
      for (int k = 0; k < per_edge; ++k) {
        const double w = static_cast<double>(k) / (per_edge - 1);
        out.push_back((1.0 - w) * g[i] + w * g[j]);
      }
    }
  }
  if (out.empty()) out = g;
  return out;
}

}  // namespace

DerivativeValueSet::DerivativeValueSet(Storage s) : storage_(std::move(s)) {
  std::visit(
      [this](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Singleton>) {
          generators_ = {v.value};
        } else if constexpr (std::is_same_v<T, FiniteSet>) {
          generators_ = v.values;
        } else if constexpr (std::is_same_v<T, Segment>) {
          generators_ = {v.a, v.b};
        } else if constexpr (std::is_same_v<T, Polytope>) {
          generators_ = v.vertices;
        } else {
          generators_ = v.points;
        }
      },
      storage_);
}

DerivativeValueSet DerivativeValueSet::singleton(Vector v) {
  require_finite(v, "singleton");
  return DerivativeValueSet(Singleton{std::move(v)});
}

DerivativeValueSet DerivativeValueSet::finite(std::vector<Vector> values) {
  require_same_dim(values, "finite set");
  return DerivativeValueSet(FiniteSet{std::move(values)});
}

DerivativeValueSet DerivativeValueSet::segment(Vector a, Vector b) {
  require_same_dim({a, b}, "segment");
  if ((a - b).norm() == 0.0) throw InvalidArgument("segment endpoints coincide");
  return DerivativeValueSet(Segment{std::move(a), std::move(b)});
}

DerivativeValueSet DerivativeValueSet::polytope(std::vector<Vector> vertices) {
  require_same_dim(vertices, "polytope");
  return DerivativeValueSet(Polytope{std::move(vertices)});
}

DerivativeValueSet DerivativeValueSet::sampled(std::vector<Vector> points,
                                               SampleRecord record) {
  require_same_dim(points, "sampled set");
  return DerivativeValueSet(Sampled{std::move(points), record});
}

DerivativeValueSet DerivativeValueSet::from_points(const std::vector<Vector>& points,
                                                   double tol) {
  require_same_dim(points, "point list");
  auto unique = dedup(points, tol);
  if (unique.size() == 1) return singleton(unique.front());
  return finite(std::move(unique));
}

DerivativeValueSet DerivativeValueSet::hull(const std::vector<Vector>& points,
                                            double tol) {
  require_same_dim(points, "hull");
  auto unique = dedup(points, tol);
  if (unique.size() == 1) return singleton(unique.front());
  if (unique.front().size() == 1) {
    auto [lo, hi] = std::minmax_element(
        unique.begin(), unique.end(),
        [](const Vector& a, const Vector& b) { return a[0] < b[0]; });
    return segment(*lo, *hi);
  }
  if (unique.size() == 2) return segment(unique[0], unique[1]);
  return polytope(std::move(unique));
}

DerivativeValueSet::Kind DerivativeValueSet::kind() const {
  return static_cast<Kind>(storage_.index());
}

bool DerivativeValueSet::is_convex() const {
  const Kind k = kind();
  return k == Kind::Singleton || k == Kind::Segment || k == Kind::Polytope;
}

int DerivativeValueSet::dim() const {
  return static_cast<int>(generators_.front().size());
}

double DerivativeValueSet::distance_to(const Vector& p) const {
  switch (kind()) {
    case Kind::Segment:
    case Kind::Polytope:
      return distance_to_hull(p, generators_);
    default: {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& g : generators_) best = std::min(best, (g - p).norm());
      return best;
    }
  }
}

double DerivativeValueSet::diameter() const {
  double d = 0.0;
  for (std::size_t i = 0; i < generators_.size(); ++i) {
    for (std::size_t j = i + 1; j < generators_.size(); ++j) {
      d = std::max(d, (generators_[i] - generators_[j]).norm());
    }
  }
  return d;
}

std::string DerivativeValueSet::describe() const {
  std::ostringstream os;
  os << to_string(kind()) << '(';
  const std::size_t shown = std::min<std::size_t>(generators_.size(), 8);
  for (std::size_t i = 0; i < shown; ++i) {
    if (i) os << ", ";
    os << format_vector(generators_[i]);
  }
  if (shown < generators_.size()) os << ", ... " << generators_.size() << " points";
  os << ')';
  return os.str();
}

std::string to_string(DerivativeValueSet::Kind kind) {
  switch (kind) {
    case DerivativeValueSet::Kind::Singleton: return "Singleton";
    case DerivativeValueSet::Kind::FiniteSet: return "FiniteSet";
    case DerivativeValueSet::Kind::Segment: return "Segment";
    case DerivativeValueSet::Kind::Polytope: return "Polytope";
    case DerivativeValueSet::Kind::Sampled: return "Sampled";
  }
  return "Unknown";
}

double excess(const DerivativeValueSet& a, const DerivativeValueSet& b) {
  const auto& pts = b.is_convex() ? a.generators() : discretise(a);
  double worst = 0.0;
  for (const auto& p : pts) worst = std::max(worst, b.distance_to(p));
  return worst;
}

double hausdorff(const DerivativeValueSet& a, const DerivativeValueSet& b) {
  return std::max(excess(a, b), excess(b, a));
}

Vector min_norm_point(const std::vector<Vector>& points) {
  require_same_dim(points, "min_norm_point");
  const std::size_t n = points.size();
  if (n == 1) return points.front();

  const Eigen::Index dim = points.front().size();
  if (dim == 1) {
    double lo = points.front()[0], hi = lo;
    for (const auto& p : points) {
      lo = std::min(lo, p[0]);
      hi = std::max(hi, p[0]);
    }
    Vector out(1);
    out[0] = lo > 0.0 ? lo : (hi < 0.0 ? hi : 0.0);
    return out;
  }

  double scale = 0.0;
  for (const auto& p : points) scale = std::max(scale, p.squaredNorm());
  if (scale == 0.0) return Vector::Zero(dim);
  const double z1 = 1e-14 * scale;
  const double z2 = 1e-12;

  std::size_t first = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (points[i].squaredNorm() < points[first].squaredNorm()) first = i;
  }
  std::vector<std::size_t> active{first};
  std::vector<double> lambda{1.0};
  Vector x = points[first];

  auto combine = [&](const std::vector<double>& w) {
    Vector y = Vector::Zero(dim);
    for (std::size_t i = 0; i < active.size(); ++i) y += w[i] * points[active[i]];
    return y;
  };

  // Wolfe (1976): alternate between adding the most violating vertex and
  // restoring feasibility of the affine minimiser over the active set.
  for (int major = 0; major < 1000; ++major) {
    std::size_t j = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      const double v = x.dot(points[i]);
      if (v < best) {
        best = v;
        j = i;
      }
    }
    if (x.squaredNorm() - best <= z1) break;
    if (std::find(active.begin(), active.end(), j) != active.end()) break;
    active.push_back(j);
    lambda.push_back(0.0);

    for (int minor = 0; minor < 1000; ++minor) {
      const auto k = static_cast<Eigen::Index>(active.size());
      Matrix kkt = Matrix::Zero(k + 1, k + 1);
      for (Eigen::Index a = 0; a < k; ++a) {
        for (Eigen::Index b = 0; b < k; ++b) {
          kkt(a, b) = points[active[a]].dot(points[active[b]]);
        }
        kkt(a, k) = 1.0;
        kkt(k, a) = 1.0;
      }
      Vector rhs = Vector::Zero(k + 1);
      rhs[k] = 1.0;
      const Vector sol = kkt.completeOrthogonalDecomposition().solve(rhs);
      std::vector<double> mu(sol.data(), sol.data() + k);

      if (std::all_of(mu.begin(), mu.end(), [&](double m) { return m > z2; })) {
        lambda = mu;
        x = combine(lambda);
        break;
      }
      double theta = 1.0;
      for (std::size_t i = 0; i < mu.size(); ++i) {
        if (mu[i] <= z2) {
          const double denom = lambda[i] - mu[i];
          if (denom > 0.0) theta = std::min(theta, lambda[i] / denom);
        }
      }
      for (std::size_t i = 0; i < mu.size(); ++i) {
        lambda[i] = theta * mu[i] + (1.0 - theta) * lambda[i];
      }
      std::vector<std::size_t> keep_idx;
      std::vector<double> keep_w;
      for (std::size_t i = 0; i < active.size(); ++i) {
        if (lambda[i] > z2) {
          keep_idx.push_back(active[i]);
          keep_w.push_back(lambda[i]);
        }
      }
      if (keep_idx.empty()) {
        keep_idx.push_back(active.back());
        keep_w.push_back(1.0);
      }
      active = std::move(keep_idx);
      const double total = [&] {
        double s = 0.0;
        for (double w : keep_w) s += w;
        return s;
      }();
      for (double& w : keep_w) w /= total;
      lambda = std::move(keep_w);
      x = combine(lambda);
    }
  }
  return x;
}

double distance_to_hull(const Vector& p, const std::vector<Vector>& points) {
  std::vector<Vector> shifted;
  shifted.reserve(points.size());
  for (const auto& q : points) shifted.push_back(q - p);
  return min_norm_point(shifted).norm();
}

std::vector<Vector> cluster_points(const std::vector<Vector>& points, double radius) {
  std::vector<Vector> sums;
  std::vector<Vector> leaders;
  std::vector<int> counts;
  for (const auto& p : points) {
    bool placed = false;
    for (std::size_t c = 0; c < leaders.size(); ++c) {
      if ((p - leaders[c]).norm() <= radius) {
        sums[c] += p;
        ++counts[c];
        placed = true;
        break;
      }
    }
    if (!placed) {
      leaders.push_back(p);
      sums.push_back(p);
      counts.push_back(1);
    }
  }
  std::vector<Vector> out;
  out.reserve(sums.size());
  for (std::size_t c = 0; c < sums.size(); ++c) out.push_back(sums[c] / counts[c]);
  return out;
}

}  // namespace nsnewton
