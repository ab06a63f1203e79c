#include "nsnewton/kantorovich.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace nsnewton {

namespace {

Vector uniform_in_ball(const Vector& center, double r, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto n = center.size();
  Vector w(n);
  do {
    for (Eigen::Index i = 0; i < n; ++i) w[i] = g(rng);
  } while (w.norm() == 0.0);
  const double radius = r * std::pow(u(rng), 1.0 / static_cast<double>(n));
  return center + radius * w.normalized();
}

std::vector<Vector> lattice(const Vector& x0, double r, const KantorovichOptions& opt) {
  std::vector<Vector> pts;
  const auto n = x0.size();
  if (n == 1) {
    for (int i = 0; i < opt.lattice_1d; ++i) {
      pts.push_back(x0 + vec({r * (-1.0 + 2.0 * i / (opt.lattice_1d - 1))}));
    }
  } else if (n == 2) {
    for (int i = 0; i < opt.lattice_2d; ++i) {
      for (int j = 0; j < opt.lattice_2d; ++j) {
        const Vector p = x0 + r * vec({-1.0 + 2.0 * i / (opt.lattice_2d - 1),
                                       -1.0 + 2.0 * j / (opt.lattice_2d - 1)});
        if ((p - x0).norm() <= r) pts.push_back(p);
      }
    }
  }
  return pts;
}

}  // namespace

KantorovichReport kantorovich_check(const NonsmoothMap& map, const Vector& x0, double r,
                                    const KantorovichOptions& options) {
  if (!(r > 0.0)) throw InvalidArgument("kantorovich_check: r must be positive");
  require_finite(x0, "x0");
  const Box bounding = Box::around(x0, r);
  if (!map.domain().contains(bounding.lower) || !map.domain().contains(bounding.upper)) {
    throw InvalidArgument("kantorovich_check: the ball around x0 leaves the domain box");
  }

  KantorovichReport rep;
  rep.x0 = x0;
  rep.r = r;
  rep.h0_norm = map(x0).norm();

  // (a) modulus over the bounding box of the ball.
  const auto mod = sampling::estimate_metric_regularity_modulus(map, bounding, options.modulus);
  rep.mu_unsupported = mod.unsupported;
  rep.mu_infinite = mod.infinite;
  rep.mu = mod.infinite ? std::numeric_limits<double>::infinity() : mod.mu;
  rep.mu_witness = mod.infinite ? mod.empty_preimage_target : mod.witness_x;
  rep.condition_a = !mod.unsupported && !mod.infinite;

  // alpha over random and lattice pairs.
  std::mt19937_64 rng(options.seed);
  std::vector<std::pair<Vector, Vector>> pairs;
  for (int i = 0; i < options.random_pairs; ++i) {
    Vector a = uniform_in_ball(x0, r, rng);
    Vector b = uniform_in_ball(x0, r, rng);
    pairs.emplace_back(std::move(a), std::move(b));
  }
  const auto lat = lattice(x0, r, options);
  for (std::size_t i = 0; i < lat.size(); ++i) {
    for (std::size_t j = 0; j < lat.size(); ++j) {
      if (i != j) pairs.emplace_back(lat[i], lat[j]);
    }
  }
  bool alpha_unbounded = false;
  for (const auto& [x, y] : pairs) {
    const Vector d = y - x;
    const double dn = d.norm();
    if (dn == 0.0) continue;
    const Vector hx = map(x), hy = map(y);
    DerivativeValueSet dset = DerivativeValueSet::singleton(Vector::Zero(map.output_dim()));
    try {
      dset = sampling::dirderiv_or_sample(map, x, d);
    } catch (const Unbounded&) {
      alpha_unbounded = true;
      rep.alpha = std::numeric_limits<double>::infinity();
      rep.alpha_witness_x = x;
      rep.alpha_witness_y = y;
      break;
    }
    // Both residuals are convex in v, so polytope vertices suffice.
    for (const auto& v : dset.generators()) {
      const double a = (hy - hx - v).norm() / dn;
      const double b = (hx - hy - v).norm() / dn;
      if (a > rep.alpha) {
        rep.alpha = a;
        rep.alpha_witness_x = x;
        rep.alpha_witness_y = y;
      }
      rep.alpha_stated_form = std::max(rep.alpha_stated_form, b);
    }
  }

  // (b) probe |w|/|z| over shrinking z.
  rep.condition_b = true;
  {
    std::vector<Vector> pts = lat;
    std::mt19937_64 prng(options.seed ^ 0x5DEECE66DULL);
    for (int i = 0; i < options.probe_points; ++i) pts.push_back(uniform_in_ball(x0, r, prng));
    const auto dirs = sampling::probe_directions(map.input_dim(), 2, options.seed);
    for (const auto& x : pts) {
      for (const auto& w : dirs) {
        for (double eps : options.probe_scales) {
          try {
            const auto set = sampling::dirderiv_or_sample(map, x, eps * w);
            for (const auto& v : set.generators()) {
              rep.max_derivative_ratio = std::max(rep.max_derivative_ratio, v.norm() / eps);
            }
          } catch (const Unbounded&) {
            rep.max_derivative_ratio = std::numeric_limits<double>::infinity();
          }
        }
      }
    }
    rep.condition_b = rep.max_derivative_ratio <= kOverflowGuard;
  }

  const double am = rep.alpha * rep.mu;
  const double lhs = rep.mu * rep.h0_norm;
  const double rhs = r * (1.0 - am);
  rep.condition_c = rep.condition_a && !alpha_unbounded && am < 1.0 &&
                    lhs <= rhs + options.verdict_slack * std::max(r, lhs);
  rep.pass = rep.condition_a && rep.condition_c;
  if (!rep.pass) {
    std::ostringstream os;
    if (rep.mu_unsupported) {
      os << "modulus estimation unsupported for this map";
    } else if (rep.mu_infinite) {
      os << "metric regularity fails on the ball (empty preimage)";
    } else if (!(am < 1.0)) {
      os << "alpha*mu = " << am << " >= 1";
    } else {
      os << "mu*|H(x0)| = " << lhs << " exceeds r(1 - alpha*mu) = " << rhs;
    }
    rep.failure = os.str();
    return rep;
  }

  SolverConfig cfg = options.solver;
  cfg.method = Method::Graphical;
  rep.trace = run_newton(map, x0, cfg);
  const auto& tr = *rep.trace;
  for (std::size_t k = 0; k < tr.iterates.size(); ++k) {
    if ((tr.iterates[k] - x0).norm() > r * (1.0 + 1e-12)) {
      std::ostringstream os;
      os << "iterate " << k << " left the ball despite a passing check";
      throw RegionExit(os.str(), static_cast<int>(k));
    }
  }
  rep.audit_holds = tr.termination == Termination::Converged;
  const Vector& xbar = tr.final_iterate();
  const double factor = am / (1.0 - am);
  for (std::size_t k = 1; k < tr.iterates.size(); ++k) {
    AuditRow row;
    row.k = static_cast<int>(k);
    row.error = (tr.iterates[k] - xbar).norm();
    row.bound = factor * (tr.iterates[k] - tr.iterates[k - 1]).norm();
    row.slack = row.bound - row.error;
    if (row.slack < -1e-12 * std::max(1.0, xbar.norm())) rep.audit_holds = false;
    rep.audit.push_back(row);
  }
  return rep;
}

}  // namespace nsnewton
