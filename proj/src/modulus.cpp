#include "nsnewton/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace nsnewton::sampling {

namespace {

Box inflate(const Box& region, double fraction, const Box& domain) {
  const Vector pad = fraction * region.width();
  return Box{region.lower - pad, region.upper + pad}.intersect(domain);
}

std::vector<Vector> preimages_1d(const NonsmoothMap& map, double y, const Box& search,
                                 int points) {
  const double lo = search.lower[0], hi = search.upper[0];
  auto f = [&](double x) { return map(vec({x}))[0] - y; };
  const double tol_zero = 1e-13 * std::max(1.0, std::abs(y));
  std::vector<Vector> roots;
  auto add = [&](double r) {
    if (roots.empty() || std::abs(roots.back()[0] - r) > 1e-9 * (hi - lo)) roots.push_back(vec({r}));
  };
  double xa = lo, fa = f(lo);
  for (int i = 1; i <= points; ++i) {
    const double xb = lo + (hi - lo) * i / points;
    const double fb = f(xb);
    if (std::abs(fa) <= tol_zero) {
      add(xa);
    } else if (fa * fb < 0.0) {
      double a = xa, b = xb, va = fa;
      for (int it = 0; it < 200 && b - a > 1e-15 * std::max(1.0, std::abs(a)); ++it) {
        const double c = 0.5 * (a + b);
        const double vc = f(c);
        if (vc == 0.0) {
          a = b = c;
          break;
        }
        if ((vc < 0.0) == (va < 0.0)) {
          a = c;
          va = vc;
        } else {
          b = c;
        }
      }
      add(0.5 * (a + b));
    }
    xa = xb;
    fa = fb;
  }
  if (std::abs(fa) <= tol_zero) add(xa);
  return roots;
}

std::vector<Vector> preimages_2d(const NonsmoothMap& map, const Vector& y, const Box& search,
                                 int per_axis) {
  const Vector w = search.width();
  std::vector<std::pair<double, Vector>> grid;
  grid.reserve(static_cast<std::size_t>(per_axis) * per_axis);
  for (int i = 0; i < per_axis; ++i) {
    for (int j = 0; j < per_axis; ++j) {
      const Vector x = search.lower + Vector(vec({w[0] * i / (per_axis - 1),
                                                  w[1] * j / (per_axis - 1)}));
      grid.emplace_back((map(x) - y).norm(), x);
    }
  }
  std::sort(grid.begin(), grid.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  const double accept = 1e-9 * std::max(1.0, y.norm());
  const double cell = w.maxCoeff() / (per_axis - 1);
  std::vector<Vector> roots;
  const std::size_t candidates = std::min<std::size_t>(grid.size(), 12);
  for (std::size_t c = 0; c < candidates; ++c) {
    Vector x = grid[c].second;
    double r = grid[c].first;
    double step = cell;
    // Compass search on |H(x) - y|.
    for (int it = 0; it < 4000 && step > 1e-14 * std::max(1.0, x.norm()) && r > 0.0; ++it) {
      bool moved = false;
      for (int axis = 0; axis < 2 && !moved; ++axis) {
        for (double sgn : {1.0, -1.0}) {
          Vector cand = x;
          cand[axis] += sgn * step;
          if (!search.contains(cand)) continue;
          const double rc = (map(cand) - y).norm();
          if (rc < r) {
            x = cand;
            r = rc;
            moved = true;
            break;
          }
        }
      }
      if (!moved) step *= 0.5;
    }
    if (r > accept) continue;
    bool seen = false;
    for (const auto& q : roots) {
      if ((q - x).norm() <= 1e-6 * std::max(1.0, cell)) seen = true;
    }
    if (!seen) roots.push_back(x);
  }
  return roots;
}

std::vector<Vector> local_points(const Vector& c, double rho, int count, const Box& region) {
  std::vector<Vector> out;
  const int n = static_cast<int>(c.size());
  if (n == 1) {
    for (int i = 0; i < count; ++i) {
      const double s = -1.0 + 2.0 * i / (count - 1);
      Vector x = c + vec({s * rho});
      if (region.contains(x)) out.push_back(x);
    }
    return out;
  }
  out.push_back(c);
  const double pi = std::acos(-1.0);
  for (int i = 0; i + 1 < count; ++i) {
    const double a = 2.0 * pi * i / (count - 1);
    Vector x = c + rho * vec({std::cos(a), std::sin(a)});
    if (region.contains(x)) out.push_back(x);
  }
  return out;
}

std::vector<Vector> centers(const Box& region, int count) {
  std::vector<Vector> out;
  if (region.dim() == 1) {
    for (int i = 0; i < count; ++i) {
      out.push_back(vec({region.lower[0] + region.width()[0] * i / (count - 1)}));
    }
    return out;
  }
  const int per_axis = std::max(2, static_cast<int>(std::lround(std::sqrt(count))));
  for (int i = 0; i < per_axis; ++i) {
    for (int j = 0; j < per_axis; ++j) {
      out.push_back(region.lower + Vector(vec({region.width()[0] * i / (per_axis - 1),
                                               region.width()[1] * j / (per_axis - 1)})));
    }
  }
  return out;
}

}  // namespace

std::vector<Vector> find_preimages(const NonsmoothMap& map, const Vector& y, const Box& search,
                                   const ModulusOptions& options) {
  if (!map.is_square() || map.input_dim() > 2) {
    throw InvalidArgument("find_preimages: only square maps with n <= 2");
  }
  const Box box = search.intersect(map.domain());
  if (map.input_dim() == 1) return preimages_1d(map, y[0], box, options.grid_1d);
  return preimages_2d(map, y, box, options.grid_2d);
}

ModulusEstimate estimate_metric_regularity_modulus(const NonsmoothMap& map, const Box& region,
                                                   const ModulusOptions& options) {
  ModulusEstimate est;
  if (!map.is_square() || map.input_dim() > 2) {
    est.unsupported = true;
    return est;
  }
  const Box reg = region.intersect(map.domain());
  const Box search = inflate(reg, options.search_inflation, map.domain());
  const double rho = options.local_fraction * reg.width().maxCoeff();
  const int n = map.input_dim();

  for (const auto& c : centers(reg, options.centers)) {
    const auto xs = local_points(c, rho, options.x_per_center, reg);
    const Vector yc = map(c);
    double rho_y = 0.0;
    std::vector<Vector> hx;
    for (const auto& x : xs) {
      hx.push_back(map(x));
      rho_y = std::max(rho_y, (hx.back() - yc).norm());
    }
    if (rho_y == 0.0) rho_y = rho;
    const auto ys = n == 1 ? local_points(vec({yc[0]}), rho_y, options.y_per_center,
                                          Box::cube(1, -1e300, 1e300))
                           : local_points(yc, rho_y, options.y_per_center,
                                          Box::cube(2, -1e300, 1e300));
    for (const auto& y : ys) {
      const auto pre = find_preimages(map, y, search, options);
      if (pre.empty()) {
        est.infinite = true;
        est.mu = std::numeric_limits<double>::infinity();
        est.empty_preimage_target = y;
        est.witness_x = c;
        return est;
      }
      for (std::size_t k = 0; k < xs.size(); ++k) {
        const double dy = (y - hx[k]).norm();
        if (dy <= 1e-12 * std::max(1.0, y.norm())) continue;
        double dx = std::numeric_limits<double>::infinity();
        for (const auto& p : pre) dx = std::min(dx, (xs[k] - p).norm());
        ++est.pairs;
        const double ratio = dx / dy;
        if (ratio > est.mu) {
          est.mu = ratio;
          est.witness_x = xs[k];
        }
      }
    }
  }
  return est;
}

}  // namespace nsnewton::sampling
