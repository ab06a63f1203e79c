#include "nsnewton/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace nsnewton::sampling {

void LimitGrid::validate() const {
  if (!(sigma > 0.0 && sigma < 1.0)) throw InvalidArgument("LimitGrid: sigma must lie in (0,1)");
  if (depth < 8) throw InvalidArgument("LimitGrid: depth must be at least 8");
  if (!(t0 > 0.0)) throw InvalidArgument("LimitGrid: t0 must be positive");
  if (t0 * std::pow(sigma, depth) < 1e-13) {
    throw InvalidArgument("LimitGrid: finest step falls below 1e-13");
  }
  if (tail_start < 0 || tail_start >= depth) throw InvalidArgument("LimitGrid: bad tail_start");
  if (substeps < 1 || offsets < 2) throw InvalidArgument("LimitGrid: bad sampling density");
}

double LimitGrid::level(int i) const { return t0 * std::pow(sigma, i); }

std::vector<double> LimitGrid::steps(int from, int to, int sub) const {
  std::vector<double> out;
  for (int i = from; i <= to; ++i) {
    const int count = i == to ? 1 : sub;
    for (int j = 0; j < count; ++j) {
      out.push_back(t0 * std::pow(sigma, i + static_cast<double>(j) / sub));
    }
  }
  return out;
}

std::vector<Vector> probe_directions(int n, int count, std::uint64_t seed) {
  std::vector<Vector> dirs;
  if (n <= 3) {
    for (int i = 0; i < n; ++i) {
      dirs.push_back(Vector::Unit(n, i));
      dirs.push_back(-Vector::Unit(n, i));
    }
  }
  if (n == 1) return dirs;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int k = 0; k < count; ++k) {
    Vector v(n);
    for (int i = 0; i < n; ++i) v[i] = g(rng);
    dirs.push_back(v.normalized());
  }
  return dirs;
}

void ResidualCurve::push(double scale, double residual) {
  if (!scales.empty() && !(scale < scales.back())) {
    throw InvalidArgument("ResidualCurve: scales must be strictly decreasing");
  }
  if (residual < 0.0 || !std::isfinite(residual)) {
    throw InvalidArgument("ResidualCurve: residuals must be finite and nonnegative");
  }
  scales.push_back(scale);
  residuals.push_back(residual);
}

void ResidualCurve::fit() {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < scales.size(); ++i) {
    if (residuals[i] > 0.0) {
      lx.push_back(std::log(scales[i]));
      ly.push_back(std::log(residuals[i]));
    }
  }
  identically_zero = lx.empty() && !scales.empty();
  if (lx.size() < 2) {
    slope = std::numeric_limits<double>::quiet_NaN();
    return;
  }
  const double n = static_cast<double>(lx.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  slope = sxx > 0 ? sxy / sxx : std::numeric_limits<double>::quiet_NaN();
}

namespace {

Vector eval_checked(const NonsmoothMap& map, const Vector& x) {
  if (!map.in_domain(x)) throw DomainExit(map.name() + ": probe left the domain box", x);
  return map(x);
}

// Keeps steps whose perturbation t*|z| stays above the roundoff floor at x.
std::vector<double> noise_filtered(const std::vector<double>& steps, const Vector& x,
                                   const Vector& hx, double znorm, double floor_rel) {
  const double scale = x.norm() + hx.norm();
  std::vector<double> out;
  for (double t : steps) {
    if (t * znorm >= floor_rel * scale) out.push_back(t);
  }
  return out;
}

std::vector<double> tail_steps(const LimitGrid& grid, const Vector& x, const Vector& hx,
                               double znorm, int substeps) {
  auto steps = noise_filtered(grid.steps(grid.tail_start, grid.depth, substeps), x, hx, znorm,
                              grid.noise_floor);
  if (steps.size() < 4) {
    // Large |x| pushes the floor above the tail; fall back to the deepest
    // admissible levels of the whole grid.
    auto all = noise_filtered(grid.steps(0, grid.depth, substeps), x, hx, znorm,
                              grid.noise_floor);
    const std::size_t keep = std::min<std::size_t>(all.size(), 4 * substeps);
    steps.assign(all.end() - static_cast<std::ptrdiff_t>(keep), all.end());
  }
  if (steps.empty()) throw InvalidArgument("LimitGrid leaves no admissible steps");
  return steps;
}

void guard(const Vector& q, const Vector& dir, double t) {
  if (!q.allFinite() || q.norm() > kOverflowGuard) {
    std::ostringstream os;
    os << "difference quotient exceeds overflow guard at t=" << t;
    throw Unbounded(os.str(), dir, t);
  }
}

DerivativeValueSet finish(std::vector<Vector> raw, const LimitGrid& grid, double t_max,
                          double t_min, int substeps, int dirs, double znorm) {
  double qmax = 0.0;
  for (const auto& q : raw) qmax = std::max(qmax, q.norm());
  const double radius = kTolCluster * std::max(qmax, znorm);
  SampleRecord rec;
  rec.t_max = t_max;
  rec.t_min = t_min;
  rec.levels = grid.depth - grid.tail_start + 1;
  rec.substeps = substeps;
  rec.directions = dirs;
  rec.cluster_radius = radius;
  rec.raw_count = raw.size();
  auto clusters = cluster_points(raw, radius > 0 ? radius : kTolCluster);
  return DerivativeValueSet::sampled(std::move(clusters), rec);
}

// Base-point directions shared by the Thibault and B-subdifferential
// samplers.
std::vector<Vector> base_directions(int n, const LimitGrid& grid) {
  return probe_directions(n, std::max(grid.random_directions, 16), grid.seed ^ 0x9E37u);
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = a + (b - a) * i / (n - 1);
  return out;
}

}  // namespace

DerivativeValueSet sample_restrictive_derivative(const NonsmoothMap& map, const Vector& x,
                                                 const Vector& z, const LimitGrid& grid) {
  grid.validate();
  const Vector hx = eval_checked(map, x);
  const double zn = z.norm();
  if (zn == 0.0) return DerivativeValueSet::singleton(Vector::Zero(map.output_dim()));
  const auto steps = tail_steps(grid, x, hx, zn, grid.substeps);
  std::vector<Vector> raw;
  raw.reserve(steps.size());
  for (double t : steps) {
    Vector q = (eval_checked(map, x + t * z) - hx) / t;
    guard(q, z, t);
    raw.push_back(std::move(q));
  }
  return finish(std::move(raw), grid, steps.front(), steps.back(), grid.substeps, 1, zn);
}

DerivativeValueSet sample_graphical_derivative(const NonsmoothMap& map, const Vector& x,
                                               const Vector& z, const LimitGrid& grid) {
  grid.validate();
  const Vector hx = eval_checked(map, x);
  const double zn = z.norm();
  const int n = map.input_dim();
  auto dirs = probe_directions(n, n <= 3 ? 2 : grid.random_directions, grid.seed);
  const double radius_scale = zn > 0.0 ? zn : 1.0;
  const auto steps = tail_steps(grid, x, hx, radius_scale, grid.substeps);
  std::vector<Vector> raw;
  raw.reserve(steps.size() * (dirs.size() + 1));
  for (double t : steps) {
    const double rho = t * radius_scale;
    for (std::size_t k = 0; k <= dirs.size(); ++k) {
      const Vector h = k == dirs.size() ? z : Vector(z + rho * dirs[k]);
      Vector q = (eval_checked(map, x + t * h) - hx) / t;
      guard(q, h, t);
      raw.push_back(std::move(q));
    }
  }
  return finish(std::move(raw), grid, steps.front(), steps.back(), grid.substeps,
                static_cast<int>(dirs.size()), zn);
}

DerivativeValueSet sample_thibault(const NonsmoothMap& map, const Vector& x, const Vector& z,
                                   const LimitGrid& grid) {
  grid.validate();
  const Vector hx = eval_checked(map, x);
  const double zn = z.norm();
  if (zn == 0.0) return DerivativeValueSet::singleton(Vector::Zero(map.output_dim()));
  const int n = map.input_dim();
  auto dirs = base_directions(n, grid);
  dirs.push_back(z / zn);
  dirs.push_back(-z / zn);
  // Offsets of u from x in units of t|z| around the kink scale.
  const int k_off = n <= 3 ? grid.offsets : std::min(grid.offsets, 9);
  const auto offsets = linspace(-2.0, 2.0, k_off);
  const auto steps = tail_steps(grid, x, hx, zn, 1);
  std::vector<Vector> raw;
  for (double t : steps) {
    for (const auto& w : dirs) {
      for (double s : offsets) {
        const Vector u = x + (s * t * zn) * w;
        if (!map.in_domain(u) || !map.in_domain(u + t * z)) continue;
        Vector q = (map(u + t * z) - map(u)) / t;
        guard(q, z, t);
        raw.push_back(std::move(q));
      }
    }
  }
  // Base points at distance rho with t = 1e-2 rho / |z|, where u + [0, t]z
  // stays on one side of nearby kinks.
  for (double rho : tail_steps(grid, x, hx, 1.0, 1)) {
    const double t = 1e-2 * rho / zn;
    for (const auto& w : dirs) {
      const Vector u = x + rho * w;
      if (!map.in_domain(u) || !map.in_domain(u + t * z)) continue;
      Vector q = (map(u + t * z) - map(u)) / t;
      guard(q, z, t);
      raw.push_back(std::move(q));
    }
  }
  return finish(std::move(raw), grid, steps.front(), steps.back(), 1,
                static_cast<int>(dirs.size()), zn);
}

DerivativeValueSet sample_bsub_image(const NonsmoothMap& map, const Vector& x, const Vector& z,
                                     const LimitGrid& grid) {
  grid.validate();
  const Vector hx = eval_checked(map, x);
  const double zn = z.norm();
  if (zn == 0.0) return DerivativeValueSet::singleton(Vector::Zero(map.output_dim()));
  const int n = map.input_dim();
  const auto dirs = base_directions(n, grid);
  const auto steps = tail_steps(grid, x, hx, 1.0, 1);
  std::vector<Vector> raw;
  for (double rho : steps) {
    const double h = 1e-2 * rho / zn;
    for (const auto& w : dirs) {
      const Vector u = x + rho * w;
      if (!map.in_domain(u + h * z) || !map.in_domain(u - h * z)) continue;
      const Vector hu = map(u);
      const Vector fwd = (map(u + h * z) - hu) / h;
      const Vector bwd = (hu - map(u - h * z)) / h;
      guard(fwd, z, h);
      if ((fwd - bwd).norm() <= 1e-4 * std::max(1.0, fwd.norm())) {
        raw.push_back(0.5 * (fwd + bwd));
      }
    }
  }
  if (raw.empty()) throw InsufficientData("no differentiability points found near x");
  return finish(std::move(raw), grid, steps.front(), steps.back(), 1,
                static_cast<int>(dirs.size()), zn);
}

DerivativeValueSet dirderiv_or_sample(const NonsmoothMap& map, const Vector& x,
                                      const Vector& d, const LimitGrid& grid) {
  if (map.hooks().dirderiv) {
    try {
      return dirderiv_set(map, x, d);
    } catch (const CapabilityMissing&) {
      // fall through to sampling
    }
  }
  return sample_restrictive_derivative(map, x, d, grid);
}

BoundednessVerdict check_directional_boundedness(const NonsmoothMap& map, const Vector& x,
                                                 const std::vector<Vector>& directions,
                                                 const LimitGrid& grid) {
  grid.validate();
  BoundednessVerdict out;
  const Vector hx = eval_checked(map, x);
  for (const auto& z : directions) {
    const double zn = z.norm();
    if (zn == 0.0) continue;
    const auto steps =
        noise_filtered(grid.steps(0, grid.depth, grid.substeps), x, hx, zn, grid.noise_floor);
    // Per-level maxima for the growth fit.
    std::vector<double> log_t, log_q;
    double level_max = 0.0;
    int in_level = 0;
    for (double t : steps) {
      const Vector q = (eval_checked(map, x + t * z) - hx) / t;
      const double qn = q.allFinite() ? q.norm() / zn : std::numeric_limits<double>::infinity();
      out.max_quotient = std::max(out.max_quotient, qn);
      if (qn > kOverflowGuard) {
        out.bounded = false;
        out.witness_direction = z;
        out.witness_scale = t;
        out.reason = "quotient exceeds overflow guard";
        return out;
      }
      level_max = std::max(level_max, qn);
      if (++in_level == grid.substeps) {
        if (level_max > 0.0) {
          log_t.push_back(std::log(t));
          log_q.push_back(std::log(level_max));
        }
        level_max = 0.0;
        in_level = 0;
      }
    }
    const std::size_t half = log_t.size() / 2;
    if (log_t.size() - half >= 4) {
      double mx = 0, my = 0;
      const double cnt = static_cast<double>(log_t.size() - half);
      for (std::size_t i = half; i < log_t.size(); ++i) {
        mx += log_t[i];
        my += log_q[i];
      }
      mx /= cnt;
      my /= cnt;
      double sxy = 0, sxx = 0;
      for (std::size_t i = half; i < log_t.size(); ++i) {
        sxy += (log_t[i] - mx) * (log_q[i] - my);
        sxx += (log_t[i] - mx) * (log_t[i] - mx);
      }
      const double p = sxx > 0 ? -sxy / sxx : 0.0;
      out.growth_exponent = std::max(out.growth_exponent, p);
      const double growth = std::exp(log_q.back() - log_q[half]);
      if (p >= 0.1 && growth >= 10.0) {
        out.bounded = false;
        out.witness_direction = z;
        out.witness_scale = std::exp(log_t.back());
        out.reason = "quotient grows like a negative power of t";
        return out;
      }
    }
  }
  return out;
}

DifferentiabilityVerdict check_directional_differentiability(
    const NonsmoothMap& map, const Vector& x, const std::vector<Vector>& directions,
    const LimitGrid& grid) {
  grid.validate();
  DifferentiabilityVerdict out;
  const Vector hx = eval_checked(map, x);
  for (const auto& z : directions) {
    const double zn = z.norm();
    if (zn == 0.0) continue;
    const auto steps = tail_steps(grid, x, hx, zn, grid.substeps);
    std::vector<Vector> qs;
    double qmax = 0.0;
    for (double t : steps) {
      qs.push_back((eval_checked(map, x + t * z) - hx) / t);
      qmax = std::max(qmax, qs.back().norm());
    }
    double diam = 0.0;
    if (qs.front().size() == 1) {
      double lo = qs.front()[0], hi = lo;
      for (const auto& q : qs) {
        lo = std::min(lo, q[0]);
        hi = std::max(hi, q[0]);
      }
      diam = hi - lo;
    } else {
      for (std::size_t i = 0; i < qs.size(); ++i) {
        for (std::size_t j = i + 1; j < qs.size(); ++j) diam = std::max(diam, (qs[i] - qs[j]).norm());
      }
    }
    const double rel = diam / std::max({1.0, qmax, zn});
    if (rel > out.max_tail_diameter) out.max_tail_diameter = rel;
    if (rel > kTolDirDiff && out.directionally_differentiable) {
      out.directionally_differentiable = false;
      out.witness_direction = z;
    }
  }
  return out;
}

ResidualCurve h2_residual_curve(const NonsmoothMap& map, const Vector& xbar,
                                const std::vector<Vector>& path, double tol_root) {
  const Vector hbar = eval_checked(map, xbar);
  if (hbar.norm() > tol_root) throw InvalidArgument("h2_residual_curve: xbar is not a root");
  ResidualCurve curve;
  for (const auto& x : path) {
    const Vector hx = eval_checked(map, x);
    const auto dset = dirderiv_or_sample(map, x, xbar - x);
    const double r = dset.distance_to(hbar - hx);
    curve.push((x - xbar).norm(), r);
  }
  curve.fit();
  return curve;
}

SemismoothnessReport semismoothness_test(const NonsmoothMap& map, const Vector& xbar,
                                         const LimitGrid& grid) {
  grid.validate();
  if (!map.capabilities().lipschitz) {
    throw CapabilityMissing(map.name() + ": semismoothness test needs a Lipschitz map");
  }
  SemismoothnessReport rep;
  const Vector hbar = eval_checked(map, xbar);
  const auto dirs = probe_directions(map.input_dim(), grid.random_directions, grid.seed);
  const auto scales = noise_filtered(grid.steps(0, grid.depth, 1), xbar, hbar, 1.0, grid.noise_floor);
  std::vector<double> ratios;
  std::vector<Vector> worst_dir;
  for (double rho : scales) {
    double worst = 0.0;
    Vector wd = dirs.front();
    double jac_scale = 1.0;
    for (const auto& w : dirs) {
      const Vector x = xbar + rho * w;
      if (!map.in_domain(x)) continue;
      const Vector hx = map(x);
      for (const auto& a : bsub(map, x)) {
        jac_scale = std::max(jac_scale, a.norm());
        const double r = (hx - hbar - a * (rho * w)).norm();
        if (r > worst) {
          worst = r;
          wd = w;
        }
      }
    }
    rep.curve.push(rho, worst);
    ratios.push_back(worst / rho / jac_scale);
    worst_dir.push_back(wd);
  }
  rep.curve.fit();
  rep.final_ratio = ratios.empty() ? 0.0 : ratios.back();
  // o(|z|): the normalised residual must be small over the whole deeper half.
  const std::size_t half = ratios.size() / 2;
  for (std::size_t i = half; i < ratios.size(); ++i) {
    if (ratios[i] >= kTolSemismooth) {
      rep.verdict = SemismoothVerdict::NotSemismooth;
      rep.witness_direction = worst_dir[i];
      break;
    }
  }
  const auto dd = check_directional_differentiability(map, xbar, dirs, grid);
  rep.not_directionally_differentiable = !dd.directionally_differentiable;
  if (rep.not_directionally_differentiable) {
    rep.verdict = SemismoothVerdict::NotSemismooth;
    if (!rep.witness_direction) rep.witness_direction = dd.witness_direction;
  }
  return rep;
}

}  // namespace nsnewton::sampling
