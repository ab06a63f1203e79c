#include "nsnewton/map.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <random>
#include <sstream>

namespace nsnewton {

NonsmoothMap::NonsmoothMap(std::string name, int n, int m, Box domain,
                           Capabilities caps, Hooks hooks)
    : name_(std::move(name)),
      n_(n),
      m_(m),
      domain_(std::move(domain)),
      caps_(caps),
      hooks_(std::move(hooks)) {
  if (n_ <= 0 || m_ <= 0) throw InvalidArgument("map dimensions must be positive");
  if (domain_.dim() != n_) throw InvalidArgument("domain box dimension mismatch");
  if (!hooks_.eval) throw InvalidArgument("map needs an evaluation hook");
  if (caps_.has_analytic_dirderiv && !hooks_.dirderiv) {
    throw InvalidArgument("analytic dirderiv advertised without a hook");
  }
  if (caps_.directionally_differentiable && caps_.lipschitz && !hooks_.dirderiv) {
    throw InvalidArgument("directionally differentiable Lipschitz maps need dirderiv");
  }
}

Vector NonsmoothMap::operator()(const Vector& x) const {
  require_finite(x, "point");
  if (!in_domain(x)) throw DomainExit(name_ + ": point outside domain box", x);
  Vector y = hooks_.eval(x);
  if (y.size() != m_) throw InvalidArgument(name_ + ": evaluation has wrong size");
  return y;
}

Matrix fd_jacobian(const EvalFn& f, const Vector& x, double h) {
  const Vector f0 = f(x);
  Matrix j(f0.size(), x.size());
  for (Eigen::Index c = 0; c < x.size(); ++c) {
    Vector xp = x, xm = x;
    xp[c] += h;
    xm[c] -= h;
    j.col(c) = (f(xp) - f(xm)) / (2.0 * h);
  }
  return j;
}

std::vector<Generator> dedup_generators(std::vector<Generator> gens, double tol) {
  std::stable_sort(gens.begin(), gens.end(),
                   [](const Generator& a, const Generator& b) { return a.id < b.id; });
  std::vector<Generator> out;
  for (auto& g : gens) {
    const double scale = std::max(1.0, g.matrix.norm());
    const bool seen = std::any_of(out.begin(), out.end(), [&](const Generator& o) {
      return (o.matrix - g.matrix).norm() <= tol * scale;
    });
    if (!seen) out.push_back(std::move(g));
  }
  return out;
}

namespace {

struct PieceTable {
  std::vector<SmoothPiece> pieces;
  std::map<int, std::size_t> index;
  ActivityFn active;
  int n = 0;
  int m = 0;

  const SmoothPiece& piece(int id) const {
    auto it = index.find(id);
    if (it == index.end()) throw InvalidArgument("activity returned unknown piece id");
    return pieces[it->second];
  }

  std::vector<int> active_at(const Vector& x) const {
    auto ids = active(x);
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    if (ids.empty()) throw EmptyActivity("no active piece", x);
    return ids;
  }
};

std::vector<Vector> validation_points(const Box& box, const PiecewiseOptions& opt) {
  const int n = box.dim();
  std::vector<Vector> pts;
  if (n <= 2) {
    const int per_axis = n == 1 ? opt.grid_points : std::min(opt.grid_points, 101);
    std::vector<double> axis0(per_axis), axis1(per_axis);
    for (int i = 0; i < per_axis; ++i) {
      axis0[i] = box.lower[0] + i * (box.upper[0] - box.lower[0]) / (per_axis - 1);
      if (n == 2) axis1[i] = box.lower[1] + i * (box.upper[1] - box.lower[1]) / (per_axis - 1);
    }
    if (n == 1) {
      for (double a : axis0) pts.push_back(Vector::Constant(1, a));
    } else {
      for (double a : axis0) {
        for (double b : axis1) {
          Vector p(2);
          p << a, b;
          pts.push_back(p);
        }
      }
    }
    return pts;
  }
  std::mt19937_64 rng(0x5EEDu);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < opt.random_points; ++i) {
    Vector p(n);
    for (int c = 0; c < n; ++c) p[c] = box.lower[c] + u(rng) * (box.upper[c] - box.lower[c]);
    pts.push_back(p);
  }
  return pts;
}

// Pairs of nearby points whose connecting segment is scanned for activity
// switches.
std::vector<std::pair<Vector, Vector>> validation_segments(const Box& box,
                                                           const std::vector<Vector>& pts,
                                                           const PiecewiseOptions& opt) {
  const int n = box.dim();
  std::vector<std::pair<Vector, Vector>> segs;
  if (n == 1) {
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) segs.emplace_back(pts[i], pts[i + 1]);
    return segs;
  }
  if (n == 2) {
    const auto per_axis = static_cast<std::size_t>(std::min(opt.grid_points, 101));
    for (std::size_t i = 0; i < per_axis; ++i) {
      for (std::size_t j = 0; j < per_axis; ++j) {
        const std::size_t k = i * per_axis + j;
        if (j + 1 < per_axis) segs.emplace_back(pts[k], pts[k + 1]);
        if (i + 1 < per_axis) segs.emplace_back(pts[k], pts[k + per_axis]);
      }
    }
    return segs;
  }
  std::mt19937_64 rng(0xB0Du);
  std::normal_distribution<double> g(0.0, 1.0);
  const double len = 0.05 * box.width().minCoeff();
  for (const auto& p : pts) {
    Vector d(n);
    for (int c = 0; c < n; ++c) d[c] = g(rng);
    Vector q = p + len * d.normalized();
    if (box.contains(q)) segs.emplace_back(p, q);
  }
  return segs;
}

void check_stitch(const PieceTable& table, const Vector& x, const std::vector<int>& ids,
                  double tol, double slack) {
  for (std::size_t a = 0; a < ids.size(); ++a) {
    const Vector ya = table.piece(ids[a]).eval(x);
    for (std::size_t b = a + 1; b < ids.size(); ++b) {
      const Vector yb = table.piece(ids[b]).eval(x);
      const double gap = (ya - yb).norm();
      if (gap > tol * std::max(1.0, ya.norm()) + slack) {
        std::ostringstream os;
        os << "pieces " << ids[a] << " and " << ids[b] << " differ by " << gap;
        throw StitchingViolation(os.str(), x, ids[a], ids[b], gap);
      }
    }
  }
}

void validate_table(const PieceTable& table, const Box& box, const PiecewiseOptions& opt) {
  const auto pts = validation_points(box, opt);
  const double h = 1e-6;
  for (const auto& x : pts) {
    const auto ids = table.active_at(x);
    check_stitch(table, x, ids, opt.tol_stitch, 0.0);
    for (int id : ids) {
      const auto& p = table.piece(id);
      const Matrix j = p.jacobian(x);
      if (j.rows() != table.m || j.cols() != table.n) {
        throw InvalidArgument("piece Jacobian has wrong shape");
      }
      const double hs = h * std::max(1.0, x.norm());
      const Matrix fd = fd_jacobian(p.eval, x, hs);
      if ((fd - j).norm() > kTolFd * std::max(1.0, j.norm())) {
        std::ostringstream os;
        os << "Jacobian of piece " << id << " disagrees with finite differences";
        throw InvalidArgument(os.str());
      }
    }
  }

  // Locate activity switches by bisection and compare the pieces meeting
  // there.
  for (const auto& [p, q] : validation_segments(box, pts, opt)) {
    const auto ap = table.active_at(p);
    const auto aq = table.active_at(q);
    if (ap == aq) continue;
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (table.active_at(p + mid * (q - p)) == ap) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    const Vector b = p + hi * (q - p);
    std::vector<int> ids = ap;
    ids.insert(ids.end(), aq.begin(), aq.end());
    const auto here = table.active_at(b);
    ids.insert(ids.end(), here.begin(), here.end());
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    // Each piece is C1, so the values drift by at most L * |hi - lo| * |q - p|.
    const double slack = 1e3 * (hi - lo) * (q - p).norm();
    check_stitch(table, b, ids, opt.tol_stitch, slack);
  }
}

}  // namespace

NonsmoothMap build_piecewise(std::vector<SmoothPiece> pieces, ActivityFn active, int n,
                             int m, Box domain, const PiecewiseOptions& options) {
  if (pieces.empty()) throw InvalidArgument("build_piecewise needs at least one piece");
  if (!active) throw InvalidArgument("build_piecewise needs an activity function");
  auto table = std::make_shared<PieceTable>();
  table->active = std::move(active);
  table->n = n;
  table->m = m;
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    if (!pieces[i].eval || !pieces[i].jacobian) {
      throw InvalidArgument("piece needs eval and jacobian");
    }
    if (!table->index.emplace(pieces[i].id, i).second) {
      throw InvalidArgument("duplicate piece id");
    }
  }
  table->pieces = std::move(pieces);

  if (options.validate) validate_table(*table, domain, options);

  NonsmoothMap::Hooks hooks;
  hooks.eval = [table](const Vector& x) {
    return table->piece(table->active_at(x).front()).eval(x);
  };
  hooks.bsub = [table](const Vector& x) {
    std::vector<Generator> gens;
    for (int id : table->active_at(x)) gens.push_back({id, table->piece(id).jacobian(x)});
    return dedup_generators(std::move(gens));
  };
  hooks.clarke_vertices = hooks.bsub;
  hooks.newton_generators = hooks.bsub;
  const Box box = domain;
  hooks.dirderiv = [table, box](const Vector& x, const Vector& d) {
    const double dn = d.norm();
    if (dn == 0.0) return DerivativeValueSet::singleton(Vector::Zero(table->m));
    const auto ids = table->active_at(x);
    static constexpr std::array<double, 3> kProbes{1e-3, 1e-5, 1e-7};
    std::vector<Vector> values;
    for (int id : ids) {
      bool consistent = false;
      for (double tau : kProbes) {
        const Vector probe = x + (tau / dn) * d;
        if (!box.contains(probe)) continue;
        const auto here = table->active_at(probe);
        if (std::find(here.begin(), here.end(), id) != here.end()) {
          consistent = true;
          break;
        }
      }
      if (consistent) values.push_back(table->piece(id).jacobian(x) * d);
    }
    if (values.empty()) {
      for (int id : ids) values.push_back(table->piece(id).jacobian(x) * d);
    }
    double scale = 1.0;
    for (const auto& v : values) scale = std::max(scale, v.norm());
    return DerivativeValueSet::from_points(values, kTolSet * scale);
  };

  Capabilities caps;
  caps.lipschitz = true;
  caps.directionally_differentiable = true;
  caps.piecewise_c1 = true;
  caps.has_analytic_dirderiv = true;
  return NonsmoothMap(options.name, n, m, std::move(domain), caps, std::move(hooks));
}

DerivativeValueSet dirderiv_set(const NonsmoothMap& map, const Vector& x, const Vector& d) {
  require_finite(x, "point");
  require_finite(d, "direction");
  if (d.size() != map.input_dim()) throw InvalidArgument("direction has wrong size");
  if (!map.in_domain(x)) throw DomainExit(map.name() + ": point outside domain box", x);
  if (!map.hooks().dirderiv) {
    throw CapabilityMissing(map.name() + ": no analytic directional derivative");
  }
  auto s = map.hooks().dirderiv(x, d);
  if (map.capabilities().directionally_differentiable &&
      s.kind() != DerivativeValueSet::Kind::Singleton &&
      s.kind() != DerivativeValueSet::Kind::Sampled) {
    // Directional differentiability forces a singleton; collapse numerical
    // duplicates before reporting.
    if (s.diameter() <= kTolSet * std::max(1.0, s.generators().front().norm())) {
      return DerivativeValueSet::singleton(s.generators().front());
    }
  }
  return s;
}

std::vector<Generator> bsub_generators(const NonsmoothMap& map, const Vector& x) {
  if (!map.capabilities().lipschitz || !map.hooks().bsub) {
    throw CapabilityMissing(map.name() + ": B-subdifferential needs a Lipschitz map");
  }
  if (!map.in_domain(x)) throw DomainExit(map.name() + ": point outside domain box", x);
  auto gens = dedup_generators(map.hooks().bsub(x));
  if (gens.empty()) throw CapabilityMissing(map.name() + ": empty B-subdifferential");
  return gens;
}

std::vector<Matrix> bsub(const NonsmoothMap& map, const Vector& x) {
  std::vector<Matrix> out;
  for (auto& g : bsub_generators(map, x)) out.push_back(std::move(g.matrix));
  return out;
}

std::vector<Generator> clarke_vertices(const NonsmoothMap& map, const Vector& x) {
  if (!map.capabilities().lipschitz) {
    throw CapabilityMissing(map.name() + ": Clarke Jacobian needs a Lipschitz map");
  }
  if (map.hooks().clarke_vertices) {
    if (!map.in_domain(x)) throw DomainExit(map.name() + ": point outside domain box", x);
    return dedup_generators(map.hooks().clarke_vertices(x));
  }
  return bsub_generators(map, x);
}

DerivativeValueSet clarke_apply(const NonsmoothMap& map, const Vector& x, const Vector& z) {
  require_finite(z, "direction");
  std::vector<Vector> images;
  for (const auto& g : clarke_vertices(map, x)) images.push_back(g.matrix * z);
  double scale = 1.0;
  for (const auto& v : images) scale = std::max(scale, v.norm());
  return DerivativeValueSet::hull(images, kTolSet * scale);
}

std::vector<Generator> newton_generators(const NonsmoothMap& map, const Vector& x) {
  if (!map.in_domain(x)) throw DomainExit(map.name() + ": point outside domain box", x);
  if (map.hooks().newton_generators) return map.hooks().newton_generators(x);
  return bsub_generators(map, x);
}

}  // namespace nsnewton
