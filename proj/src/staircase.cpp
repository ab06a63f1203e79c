#include "nsnewton/problems.hpp"

#include <cmath>

namespace nsnewton::staircase {

namespace {

// Beyond this index 2^{-k} vanishes relative to x in double precision and
// the zigzag is indistinguishable from the identity.
constexpr int kMaxIndex = 60;
constexpr double kClamp = 1e-14;

struct Location {
  int k = 0;
  double e1 = 0;  // 2^{-k}
  double u = 0;   // x - 2^{-k}
  int segment = 0;
  double right = 0;  // u at the right end of the segment
  double left = 0;   // u at the left end
  bool clamped = false;
  bool identity = false;
};

double slope_of(const Location& loc) {
  if (loc.identity) return 1.0;
  if (loc.clamped) return 1.0 - loc.e1;
  return loc.segment % 2 == 0 ? upper_slope(loc.k) : lower_slope(loc.k);
}

int id_of(const Location& loc) {
  if (loc.identity) return 0;
  if (loc.clamped) return 1000000 + loc.k;
  return 2 * loc.k + (loc.segment % 2);
}

Location locate(double x) {
  Location loc;
  loc.k = interval_index(x);
  if (loc.k > kMaxIndex) {
    loc.identity = true;
    return loc;
  }
  loc.e1 = std::ldexp(1.0, -loc.k);
  loc.u = x - loc.e1;
  const double r = 1.0 / (std::ldexp(1.0, loc.k) + 1.0);
  double right = loc.e1;
  int j = 0;
  while (true) {
    const double left = right * r;
    if (left <= kClamp && loc.u <= kClamp) {
      loc.clamped = true;
      loc.segment = j;
      loc.right = right;
      loc.left = 0.0;
      return loc;
    }
    if (loc.u > left) {
      loc.segment = j;
      loc.right = right;
      loc.left = left;
      return loc;
    }
    right = left;
    ++j;
  }
}

double eval_positive(double x) {
  const Location loc = locate(x);
  if (loc.identity) return x;
  if (loc.clamped) return loc.e1 + (1.0 - loc.e1) * loc.u;
  // The segment starts at its right end on the upper line (even index) or
  // the lower line (odd index).
  const double start = loc.segment % 2 == 0 ? loc.right : (1.0 - loc.e1) * loc.right;
  return loc.e1 + start + slope_of(loc) * (loc.u - loc.right);
}

bool is_power_of_two(double x) {
  int e = 0;
  return std::frexp(x, &e) == 0.5;
}

DerivativeValueSet dirderiv_positive(double x, double d) {
  if (is_power_of_two(x)) {
    int e = 0;
    std::frexp(x, &e);
    const int j = 1 - e;  // x = 2^{-j}
    if (d > 0.0 && j >= 1) {
      if (j > kMaxIndex) return DerivativeValueSet::singleton(vec({d}));
      return DerivativeValueSet::segment(vec({(1.0 - std::ldexp(1.0, -j)) * d}), vec({d}));
    }
    if (d > 0.0) return DerivativeValueSet::singleton(vec({upper_slope(1) * d}));
    const double s = j + 1 > kMaxIndex ? 1.0 : upper_slope(j + 1);
    return DerivativeValueSet::singleton(vec({s * d}));
  }
  const Location loc = locate(x);
  if (loc.identity || loc.clamped) return DerivativeValueSet::singleton(vec({slope_of(loc) * d}));
  // Interior breakpoint: moving right enters the previous segment.
  if (loc.u == loc.right && loc.segment > 0 && d > 0.0) {
    Location prev = loc;
    prev.segment -= 1;
    return DerivativeValueSet::singleton(vec({slope_of(prev) * d}));
  }
  return DerivativeValueSet::singleton(vec({slope_of(loc) * d}));
}

std::vector<Generator> bsub_positive(double x) {
  auto gen = [](int id, double s) { return Generator{id, Matrix::Constant(1, 1, s)}; };
  if (is_power_of_two(x)) {
    int e = 0;
    std::frexp(x, &e);
    const int j = 1 - e;
    std::vector<Generator> out;
    if (j >= 1 && j <= kMaxIndex) {
      out.push_back(gen(2 * j, upper_slope(j)));
      out.push_back(gen(2 * j + 1, lower_slope(j)));
    }
    if (j + 1 <= kMaxIndex) {
      out.push_back(gen(2 * (j + 1), upper_slope(j + 1)));
    } else {
      out.push_back(gen(0, 1.0));
    }
    return dedup_generators(std::move(out), 0.0);
  }
  const Location loc = locate(x);
  std::vector<Generator> out{gen(id_of(loc), slope_of(loc))};
  if (!loc.identity && !loc.clamped && loc.u == loc.right && loc.segment > 0) {
    Location prev = loc;
    prev.segment -= 1;
    out.push_back(gen(id_of(prev), slope_of(prev)));
  }
  return dedup_generators(std::move(out), 0.0);
}

}  // namespace

int interval_index(double x) {
  if (!(x > 0.0 && x <= 1.0)) throw InvalidArgument("staircase: interval_index needs 0 < x <= 1");
  int e = 0;
  const double m = std::frexp(x, &e);
  return m == 0.5 ? 2 - e : 1 - e;
}

double upper_slope(int k) { return 1.0 + std::ldexp(1.0, -2 * k); }
double lower_slope(int k) { return 1.0 - std::ldexp(1.0, -k) - std::ldexp(1.0, -2 * k); }

double eval(double x) {
  if (!(std::abs(x) <= 1.0)) throw DomainExit("staircase: |x| > 1", vec({x}));
  if (x == 0.0) return 0.0;
  return x > 0.0 ? eval_positive(x) : -eval_positive(-x);
}

DerivativeValueSet dirderiv(double x, double d) {
  if (!(std::abs(x) <= 1.0)) throw DomainExit("staircase: |x| > 1", vec({x}));
  if (d == 0.0) return DerivativeValueSet::singleton(vec({0.0}));
  if (x == 0.0) return DerivativeValueSet::singleton(vec({d}));
  if (x > 0.0) return dirderiv_positive(x, d);
  // Odd symmetry: DH(x)(d) = -DH(-x)(-d).
  const auto mirrored = dirderiv_positive(-x, -d);
  if (mirrored.kind() == DerivativeValueSet::Kind::Segment) {
    const auto& g = mirrored.generators();
    return DerivativeValueSet::segment(-g[1], -g[0]);
  }
  return DerivativeValueSet::singleton(-mirrored.generators().front());
}

std::vector<Generator> bsub(double x) {
  if (!(std::abs(x) <= 1.0)) throw DomainExit("staircase: |x| > 1", vec({x}));
  if (x == 0.0) return {Generator{0, Matrix::Constant(1, 1, 1.0)}};
  return bsub_positive(std::abs(x));
}

MapPtr make_map() {
  Capabilities caps;
  caps.lipschitz = true;
  caps.directionally_differentiable = false;
  caps.piecewise_c1 = false;
  caps.has_analytic_dirderiv = true;
  NonsmoothMap::Hooks hooks;
  hooks.eval = [](const Vector& x) { return vec({eval(x[0])}); };
  hooks.dirderiv = [](const Vector& x, const Vector& d) { return dirderiv(x[0], d[0]); };
  hooks.bsub = [](const Vector& x) { return bsub(x[0]); };
  hooks.clarke_vertices = hooks.bsub;
  return std::make_shared<const NonsmoothMap>("staircase", 1, 1, Box::cube(1, -1.0, 1.0), caps,
                                              std::move(hooks));
}

}  // namespace nsnewton::staircase
