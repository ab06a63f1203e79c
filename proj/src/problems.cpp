#include "nsnewton/problems.hpp"

#include "nsnewton/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace nsnewton {

namespace {

Matrix scalar(double v) { return Matrix::Constant(1, 1, v); }

SmoothPiece linear_piece(int id, double slope, double offset = 0.0) {
  return SmoothPiece{id, [slope, offset](const Vector& x) { return vec({slope * x[0] + offset}); },
                     [slope](const Vector&) { return scalar(slope); }};
}

// Kinks of a 1-D piecewise-linear map with their one-sided slopes.
struct Kink {
  double x;
  double left;
  double right;
};

// Limiting subdifferential of z*H: a convex kink of z*H gives the interval
// between the one-sided slopes, a concave kink only the two slopes.
std::function<DerivativeValueSet(double, double)> scalarized_pl(
    std::vector<Kink> kinks, std::function<double(double)> slope) {
  return [kinks = std::move(kinks), slope = std::move(slope)](double x, double z) {
    for (const auto& k : kinks) {
      if (x != k.x) continue;
      const double a = z * k.left, b = z * k.right;
      if (a == b) return DerivativeValueSet::singleton(vec({a}));
      if (a < b) return DerivativeValueSet::segment(vec({a}), vec({b}));
      return DerivativeValueSet::finite({vec({a}), vec({b})});
    }
    return DerivativeValueSet::singleton(vec({z * slope(x)}));
  };
}

std::vector<Vector> dyadic_path(const Vector& root, const Box& domain) {
  const Vector dir = Vector::Ones(root.size()).normalized();
  std::vector<Vector> path;
  for (int k = 3; k <= 18; ++k) {
    const Vector x = root + std::ldexp(1.0, -k) * dir;
    if (domain.contains(x)) path.push_back(x);
  }
  return path;
}

ProblemSpec abs1d() {
  ProblemSpec p;
  p.id = "abs1d";
  PiecewiseOptions opt;
  opt.name = p.id;
  p.map = std::make_shared<const NonsmoothMap>(build_piecewise(
      {linear_piece(0, -1.0), linear_piece(1, 1.0)},
      [](const Vector& x) {
        std::vector<int> ids;
        if (x[0] <= 0.0) ids.push_back(0);
        if (x[0] >= 0.0) ids.push_back(1);
        return ids;
      },
      1, 1, Box::cube(1, -2.0, 2.0), opt));
  p.known_roots = {vec({0.0})};
  p.recommended_x0 = {vec({0.1}), vec({-0.1}), vec({0.05}), vec({-0.07}), vec({0.5})};
  p.kink_points = {vec({0.0})};
  p.semismooth = true;
  p.scalarized = scalarized_pl({{0.0, -1.0, 1.0}}, [](double x) { return x < 0 ? -1.0 : 1.0; });
  p.h2_path = dyadic_path(p.known_roots.front(), p.map->domain());
  p.notes = "H(x)=|x|: graphical derivative at 0 is {|d|}, strictly inside the Clarke image";
  return p;
}

ProblemSpec halfabs() {
  ProblemSpec p;
  p.id = "halfabs";
  PiecewiseOptions opt;
  opt.name = p.id;
  p.map = std::make_shared<const NonsmoothMap>(build_piecewise(
      {linear_piece(0, 0.5), linear_piece(1, 1.5)},
      [](const Vector& x) {
        std::vector<int> ids;
        if (x[0] <= 0.0) ids.push_back(0);
        if (x[0] >= 0.0) ids.push_back(1);
        return ids;
      },
      1, 1, Box::cube(1, -5.0, 5.0), opt));
  p.known_roots = {vec({0.0})};
  p.recommended_x0 = {vec({0.1}), vec({-0.1}), vec({1.0}), vec({-1.0})};
  p.kink_points = {vec({0.0})};
  p.semismooth = true;
  p.scalarized = scalarized_pl({{0.0, 0.5, 1.5}}, [](double x) { return x < 0 ? 0.5 : 1.5; });
  p.h2_path = dyadic_path(p.known_roots.front(), p.map->domain());
  p.notes = "H(x)=x+0.5|x|: nonsmooth but metrically regular at 0 (slopes 0.5 and 1.5)";
  return p;
}

ProblemSpec ramp() {
  ProblemSpec p;
  p.id = "ramp";
  PiecewiseOptions opt;
  opt.name = p.id;
  p.map = std::make_shared<const NonsmoothMap>(build_piecewise(
      {linear_piece(0, 0.0), linear_piece(1, 1.0)},
      [](const Vector& x) {
        std::vector<int> ids;
        if (x[0] <= 0.0) ids.push_back(0);
        if (x[0] >= 0.0) ids.push_back(1);
        return ids;
      },
      1, 1, Box::cube(1, -2.0, 2.0), opt));
  p.known_roots = {vec({0.0})};
  p.recommended_x0 = {vec({0.5})};
  p.kink_points = {vec({0.0})};
  p.semismooth = true;
  p.scalarized = scalarized_pl({{0.0, 0.0, 1.0}}, [](double x) { return x < 0 ? 0.0 : 1.0; });
  p.notes = "H(x)=max(x,0): B-subdifferential at 0 contains the singular element 0";
  return p;
}

ProblemSpec linear2x() {
  ProblemSpec p;
  p.id = "linear2x";
  PiecewiseOptions opt;
  opt.name = p.id;
  p.map = std::make_shared<const NonsmoothMap>(build_piecewise(
      {linear_piece(0, 2.0)}, [](const Vector&) { return std::vector<int>{0}; }, 1, 1,
      Box::cube(1, -5.0, 5.0), opt));
  p.known_roots = {vec({0.0})};
  p.recommended_x0 = {vec({1.0}), vec({3.0})};
  p.smooth = true;
  p.semismooth = true;
  p.scalarized = scalarized_pl({}, [](double) { return 2.0; });
  p.h2_path = dyadic_path(p.known_roots.front(), p.map->domain());
  p.notes = "H(x)=2x";
  return p;
}

ProblemSpec quad1d() {
  ProblemSpec p;
  p.id = "quad1d";
  PiecewiseOptions opt;
  opt.name = p.id;
  p.map = std::make_shared<const NonsmoothMap>(build_piecewise(
      {SmoothPiece{0, [](const Vector& x) { return vec({x[0] * x[0] - 1.0}); },
                   [](const Vector& x) { return scalar(2.0 * x[0]); }}},
      [](const Vector&) { return std::vector<int>{0}; }, 1, 1, Box::cube(1, -5.0, 5.0), opt));
  p.known_roots = {vec({1.0}), vec({-1.0})};
  p.recommended_x0 = {vec({2.0}), vec({1.05}), vec({0.95})};
  p.smooth = true;
  p.semismooth = true;
  p.h2_path = dyadic_path(p.known_roots.front(), p.map->domain());
  p.notes = "H(x)=x^2-1, smooth baseline";
  return p;
}

ProblemSpec square1d() {
  ProblemSpec p;
  p.id = "square1d";
  PiecewiseOptions opt;
  opt.name = p.id;
  p.map = std::make_shared<const NonsmoothMap>(build_piecewise(
      {SmoothPiece{0, [](const Vector& x) { return vec({x[0] * x[0]}); },
                   [](const Vector& x) { return scalar(2.0 * x[0]); }}},
      [](const Vector&) { return std::vector<int>{0}; }, 1, 1, Box::cube(1, -2.0, 2.0), opt));
  p.known_roots = {vec({0.0})};
  p.recommended_x0 = {vec({1.0})};
  p.smooth = true;
  p.semismooth = true;
  p.notes = "H(x)=x^2: smooth with a singular Jacobian at the root";
  return p;
}

ProblemSpec quad2d() {
  ProblemSpec p;
  p.id = "quad2d";
  PiecewiseOptions opt;
  opt.name = p.id;
  p.map = std::make_shared<const NonsmoothMap>(build_piecewise(
      {SmoothPiece{0,
                   [](const Vector& x) {
                     return vec({x[0] * x[0] + x[1] * x[1] - 2.0, x[0] * x[0] - x[1]});
                   },
                   [](const Vector& x) {
                     Matrix j(2, 2);
                     j << 2.0 * x[0], 2.0 * x[1], 2.0 * x[0], -1.0;
                     return j;
                   }}},
      [](const Vector&) { return std::vector<int>{0}; }, 2, 2, Box::cube(2, -3.0, 3.0), opt));
  p.known_roots = {vec({1.0, 1.0})};
  p.recommended_x0 = {vec({2.0, 1.5}), vec({1.05, 0.95}), vec({0.8, 1.3})};
  p.smooth = true;
  p.semismooth = true;
  p.h2_path = dyadic_path(p.known_roots.front(), p.map->domain());
  p.notes = "H(x)=(x1^2+x2^2-2, x1^2-x2), smooth 2-D baseline";
  return p;
}

ProblemSpec ncp_min_2d() {
  ProblemSpec p;
  p.id = "ncp_min_2d";
  Matrix m(2, 2);
  m << 2.0, 1.0, 0.5, 2.0;
  const Vector q = vec({-2.0, 0.5});
  std::vector<SmoothPiece> pieces;
  for (int id = 0; id < 4; ++id) {
    const bool f1 = id & 1, f2 = id & 2;
    Matrix j = Matrix::Identity(2, 2);
    if (f1) j.row(0) = m.row(0);
    if (f2) j.row(1) = m.row(1);
    Vector c = Vector::Zero(2);
    if (f1) c[0] = q[0];
    if (f2) c[1] = q[1];
    pieces.push_back(SmoothPiece{id, [j, c](const Vector& x) { return Vector(j * x + c); },
                                 [j](const Vector&) { return j; }});
  }
  auto active = [m, q](const Vector& x) {
    const Vector f = m * x + q;
    std::vector<int> ids;
    for (int id = 0; id < 4; ++id) {
      bool ok = true;
      for (int i = 0; i < 2; ++i) {
        const bool use_f = id & (1 << i);
        ok = ok && (use_f ? f[i] <= x[i] : x[i] <= f[i]);
      }
      if (ok) ids.push_back(id);
    }
    return ids;
  };
  PiecewiseOptions opt;
  opt.name = p.id;
  p.map = std::make_shared<const NonsmoothMap>(
      build_piecewise(std::move(pieces), active, 2, 2, Box::cube(2, -3.0, 3.0), opt));
  p.known_roots = {vec({1.0, 0.0})};
  p.recommended_x0 = {vec({1.06, 0.06}), vec({0.93, 0.03}), vec({1.0, -0.09}),
                      vec({0.95, -0.05})};
  // Points on the switching lines x1 = F1(x) and x2 = F2(x).
  p.kink_points = {vec({1.0, 1.0}), vec({0.5, 1.5}), vec({1.0, -1.0}), vec({0.0, -0.5})};
  p.semismooth = true;
  p.h2_path = dyadic_path(p.known_roots.front(), p.map->domain());
  p.notes = "min(x, Mx+q) for a 2-D linear complementarity problem, strictly complementary root";
  return p;
}

ProblemSpec xsin1x() {
  ProblemSpec p;
  p.id = "xsin1x";
  Capabilities caps;
  caps.has_analytic_dirderiv = true;
  NonsmoothMap::Hooks hooks;
  hooks.eval = [](const Vector& x) {
    return vec({x[0] == 0.0 ? 0.0 : x[0] * std::sin(1.0 / x[0])});
  };
  hooks.dirderiv = [](const Vector& x, const Vector& d) {
    const double t = x[0];
    if (d[0] == 0.0) return DerivativeValueSet::singleton(vec({0.0}));
    if (t == 0.0) {
      const double a = std::abs(d[0]);
      return DerivativeValueSet::segment(vec({-a}), vec({a}));
    }
    const double slope = std::sin(1.0 / t) - std::cos(1.0 / t) / t;
    return DerivativeValueSet::singleton(vec({slope * d[0]}));
  };
  p.map = std::make_shared<const NonsmoothMap>(p.id, 1, 1, Box::cube(1, -1.0, 1.0), caps,
                                               std::move(hooks));
  const double pi = std::acos(-1.0);
  p.known_roots = {vec({0.0}), vec({1.0 / pi})};
  p.kink_points = {vec({0.0})};
  p.h2_path = dyadic_path(p.known_roots.front(), p.map->domain());
  p.notes = "x sin(1/x): directionally bounded at 0 but not directionally differentiable";
  return p;
}

ProblemSpec signsqrt() {
  ProblemSpec p;
  p.id = "signsqrt";
  Capabilities caps;
  caps.has_analytic_dirderiv = true;
  NonsmoothMap::Hooks hooks;
  hooks.eval = [](const Vector& x) {
    return vec({std::copysign(std::sqrt(std::abs(x[0])), x[0])});
  };
  hooks.dirderiv = [](const Vector& x, const Vector& d) {
    if (d[0] == 0.0) return DerivativeValueSet::singleton(vec({0.0}));
    if (x[0] == 0.0) throw Unbounded("signsqrt: infinite slope at 0", d, 0.0);
    return DerivativeValueSet::singleton(vec({d[0] / (2.0 * std::sqrt(std::abs(x[0])))}));
  };
  p.map = std::make_shared<const NonsmoothMap>(p.id, 1, 1, Box::cube(1, -1.0, 1.0), caps,
                                               std::move(hooks));
  p.known_roots = {vec({0.0})};
  p.kink_points = {vec({0.0})};
  p.h2_path = dyadic_path(p.known_roots.front(), p.map->domain());
  p.notes = "sign(x)sqrt|x|: difference quotients at 0 grow like t^{-1/2}";
  return p;
}

ProblemSpec nonlip2d() {
  ProblemSpec p;
  p.id = "nonlip2d";
  Capabilities caps;
  caps.directionally_differentiable = true;
  caps.has_analytic_dirderiv = true;
  NonsmoothMap::Hooks hooks;
  hooks.eval = [](const Vector& x) {
    return vec({x[1] * std::sqrt(std::abs(x[0]) + std::pow(std::abs(x[1]), 3)), x[0]});
  };
  hooks.dirderiv = [](const Vector& x, const Vector& d) {
    const double s = std::abs(x[0]) + std::pow(std::abs(x[1]), 3);
    if (s == 0.0) return DerivativeValueSet::singleton(vec({0.0, d[0]}));
    const double g = std::sqrt(s);
    const double ds = (x[0] != 0.0 ? std::copysign(1.0, x[0]) * d[0] : std::abs(d[0])) +
                      3.0 * x[1] * std::abs(x[1]) * d[1];
    return DerivativeValueSet::singleton(vec({d[1] * g + x[1] * ds / (2.0 * g), d[0]}));
  };
  p.map = std::make_shared<const NonsmoothMap>(p.id, 2, 2, Box::cube(2, -1.0, 1.0), caps,
                                               std::move(hooks));
  p.known_roots = {vec({0.0, 0.0})};
  p.kink_points = {vec({0.0, 0.0}), vec({0.0, 0.5})};
  for (int i = 0; i <= 12; ++i) {
    const double t = std::pow(10.0, -(1.0 + 0.5 * i));
    p.h2_path.push_back(vec({t, t}));
  }
  p.notes = "H(x1,x2)=(x2 sqrt(|x1|+|x2|^3), x1): one-to-one, directionally differentiable, "
            "not Lipschitz near the origin";
  return p;
}

ProblemSpec staircase_problem() {
  ProblemSpec p;
  p.id = "staircase";
  p.map = staircase::make_map();
  p.known_roots = {vec({0.0})};
  p.recommended_x0 = {vec({0.6})};
  for (int k = 1; k <= 10; ++k) p.kink_points.push_back(vec({std::ldexp(1.0, -k)}));
  for (int k = 3; k <= 18; ++k) p.h2_path.push_back(vec({std::ldexp(1.0, -k)}));
  p.notes = "odd zigzag squeezed between (1-2^{-k})x+2^{-2k} and x on (2^{-k},2^{-(k-1)}]: "
            "Lipschitz and metrically regular, not semismooth at 0";
  return p;
}

// Uniform double in (0, 1] built from the top 53 bits, so the stream is the
// same on every standard library.
double unit(std::mt19937_64& rng) {
  return (static_cast<double>(rng() >> 11) + 1.0) * 0x1.0p-53;
}

double gaussian(std::mt19937_64& rng) {
  const double u1 = unit(rng), u2 = unit(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::acos(-1.0) * u2);
}

ProblemSpec affabs(int n) {
  const AffAbsData data = affabs_data(n);
  ProblemSpec p;
  p.id = "affabs_" + std::to_string(n);
  Capabilities caps;
  caps.lipschitz = true;
  caps.directionally_differentiable = true;
  caps.piecewise_c1 = true;
  caps.has_analytic_dirderiv = true;
  NonsmoothMap::Hooks hooks;
  hooks.eval = [data](const Vector& x) {
    return Vector(data.a * x + data.b * x.cwiseAbs() - data.rhs);
  };
  hooks.dirderiv = [data](const Vector& x, const Vector& d) {
    Vector phi(d.size());
    for (Eigen::Index i = 0; i < d.size(); ++i) {
      phi[i] = x[i] != 0.0 ? std::copysign(1.0, x[i]) * d[i] : std::abs(d[i]);
    }
    return DerivativeValueSet::singleton(data.a * d + data.b * phi);
  };
  hooks.bsub = [data](const Vector& x) {
    std::vector<Eigen::Index> zeros;
    Vector sigma(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      sigma[i] = x[i] > 0.0 ? 1.0 : -1.0;
      if (x[i] == 0.0) zeros.push_back(i);
    }
    // Sign patterns over the zero components; bit set means +1. Only the
    // first six zero components are enumerated.
    const int bits = static_cast<int>(std::min<std::size_t>(zeros.size(), 6));
    std::vector<Generator> out;
    for (int mask = 0; mask < (1 << bits); ++mask) {
      Vector s = sigma;
      for (int b = 0; b < bits; ++b) s[zeros[b]] = (mask >> b) & 1 ? 1.0 : -1.0;
      out.push_back(Generator{mask, data.a + data.b * s.asDiagonal()});
    }
    return out;
  };
  hooks.clarke_vertices = hooks.bsub;
  hooks.newton_generators = hooks.bsub;
  p.map = std::make_shared<const NonsmoothMap>(p.id, n, n, Box::cube(n, -10.0, 10.0), caps,
                                               std::move(hooks));
  p.known_roots = {data.root};
  std::mt19937_64 rng(0xC0FFEEULL + static_cast<std::uint64_t>(n));
  for (int k = 0; k < 3; ++k) {
    Vector w(n);
    for (int i = 0; i < n; ++i) w[i] = gaussian(rng);
    p.recommended_x0.push_back(data.root + 0.09 * w.normalized());
  }
  // Three zero components, so the enumerated B-subdifferential is complete.
  Vector kink = Vector::Constant(n, 0.3);
  for (int i = 0; i < std::min(n, 3); ++i) kink[i] = 0.0;
  p.kink_points = {kink};
  if (n <= 12) p.kink_points.push_back(data.root);
  p.semismooth = true;
  p.h2_path = dyadic_path(data.root, p.map->domain());
  p.notes = "Ax+B|x|-b with A = I + 0.3G/sqrt(n) dominating B = 0.1G'/sqrt(n)";
  return p;
}

std::vector<ProblemSpec> build_corpus() {
  std::vector<ProblemSpec> out;
  out.push_back(abs1d());
  out.push_back(halfabs());
  out.push_back(linear2x());
  out.push_back(ramp());
  out.push_back(quad1d());
  out.push_back(square1d());
  out.push_back(quad2d());
  out.push_back(xsin1x());
  out.push_back(signsqrt());
  out.push_back(nonlip2d());
  out.push_back(staircase_problem());
  out.push_back(affabs(2));
  out.push_back(affabs(10));
  out.push_back(affabs(50));
  out.push_back(ncp_min_2d());
  for (const auto& p : out) validate_problem(p);
  return out;
}

}  // namespace

AffAbsData affabs_data(int n, std::uint64_t seed) {
  if (n < 1) throw InvalidArgument("affabs_data: n must be positive");
  std::mt19937_64 rng(seed);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  AffAbsData d;
  d.a = Matrix::Identity(n, n);
  d.b = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) d.a(i, j) += 0.3 * scale * gaussian(rng);
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) d.b(i, j) = 0.1 * scale * gaussian(rng);
  }
  d.root = Vector::Zero(n);
  for (int i = n / 2; i < n; ++i) {
    const double mag = 0.5 + 0.5 * unit(rng);
    d.root[i] = unit(rng) < 0.5 ? -mag : mag;
  }
  d.rhs = d.a * d.root + d.b * d.root.cwiseAbs();
  return d;
}

void validate_problem(const ProblemSpec& spec) {
  const auto& map = *spec.map;
  for (const auto& r : spec.known_roots) {
    const double res = map(r).norm();
    if (res > 1e-12) {
      std::ostringstream os;
      os << spec.id << ": registered root has residual " << res;
      throw Error(os.str());
    }
  }
  const auto& caps = map.capabilities();
  if (!caps.lipschitz || !map.hooks().dirderiv) return;

  const int n = map.input_dim();
  std::vector<Vector> points = spec.kink_points;
  if (points.size() > 4) points.resize(4);
  const Vector c = map.domain().center();
  const Vector w = map.domain().width();
  for (double f : {0.137, -0.291}) {
    Vector x = c;
    for (int i = 0; i < n; ++i) x[i] += f * w[i] * (i % 2 ? -0.7 : 1.0);
    points.push_back(x);
  }
  std::vector<Vector> dirs;
  if (n <= 2) {
    for (int i = 0; i < n; ++i) {
      dirs.push_back(Vector::Unit(n, i));
      dirs.push_back(-Vector::Unit(n, i));
    }
  } else {
    dirs = sampling::probe_directions(n, 2, 0xC0FFEE);
  }
  for (const auto& x : points) {
    for (const auto& d : dirs) {
      const auto closed = dirderiv_set(map, x, d);
      const auto sampled = sampling::sample_graphical_derivative(map, x, d);
      // Sampling resolves every point of a singleton, but only a grid of a
      // continuum; for segments only require the samples to lie inside.
      const double gap = closed.kind() == DerivativeValueSet::Kind::Segment
                             ? excess(sampled, closed)
                             : hausdorff(closed, sampled);
      if (gap > kTolHausdorff) {
        std::ostringstream os;
        os << spec.id << ": closed-form directional derivative " << closed.describe()
           << " disagrees with sampling " << sampled.describe() << " (gap " << gap << ")";
        throw Error(os.str());
      }
    }
  }
  if (spec.id == "staircase") {
    const auto at0 = sampling::sample_graphical_derivative(map, vec({0.0}), vec({1.0}));
    for (const auto& v : at0.generators()) {
      if (v[0] < 0.5 - kTolHausdorff || v[0] > 1.0 + kTolHausdorff) {
        throw Error("staircase: sampled secant cluster at 0 leaves [0.5, 1]");
      }
    }
  }
}

const std::vector<ProblemSpec>& corpus() {
  static const std::vector<ProblemSpec> instance = build_corpus();
  return instance;
}

const ProblemSpec& find_problem(const std::string& id) {
  for (const auto& p : corpus()) {
    if (p.id == id) return p;
  }
  throw NotRegistered("unknown problem id: " + id);
}

std::vector<std::string> problem_ids() {
  std::vector<std::string> ids;
  for (const auto& p : corpus()) ids.push_back(p.id);
  return ids;
}

}  // namespace nsnewton
