#include "nsnewton/solvers.hpp"

#include "nsnewton/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace nsnewton {

std::string to_string(Method method) {
  switch (method) {
    case Method::Graphical: return "graphical";
    case Method::Bsub: return "bsub";
    case Method::Clarke: return "clarke";
    case Method::Bdiff: return "bdiff";
  }
  return "unknown";
}

Method parse_method(const std::string& name) {
  for (Method m : {Method::Graphical, Method::Bsub, Method::Clarke, Method::Bdiff}) {
    if (to_string(m) == name) return m;
  }
  throw InvalidArgument("unknown method: " + name);
}

std::string to_string(Termination t) {
  switch (t) {
    case Termination::Converged: return "Converged";
    case Termination::MaxIter: return "MaxIter";
    case Termination::SubproblemFailure: return "SubproblemFailure";
    case Termination::Diverged: return "Diverged";
  }
  return "Unknown";
}

Termination parse_termination(const std::string& name) {
  for (Termination t : {Termination::Converged, Termination::MaxIter,
                        Termination::SubproblemFailure, Termination::Diverged}) {
    if (to_string(t) == name) return t;
  }
  throw InvalidArgument("unknown termination reason: " + name);
}

void SolverConfig::validate() const {
  if (!(tol_residual > 0.0) || !(tol_step > 0.0) || !(eta > 0.0)) {
    throw InvalidArgument("solver tolerances must be positive");
  }
  if (max_iter < 1) throw InvalidArgument("max_iter must be at least 1");
}

namespace {

double membership_tol(double h_norm, const SolverConfig& config) {
  return config.eta * std::max(h_norm, config.tol_residual);
}

double membership(const NonsmoothMap& map, const Vector& x, const Vector& minus_h,
                  const Vector& d) {
  return sampling::dirderiv_or_sample(map, x, d).distance_to(minus_h);
}

std::vector<Generator> candidates(const NonsmoothMap& map, const Vector& x) {
  try {
    return newton_generators(map, x);
  } catch (const CapabilityMissing&) {
    // Maps without generator data (non-Lipschitz examples) offer the local
    // difference Jacobian as their only candidate.
    const double h = 1e-7 * std::max(1.0, x.norm());
    EvalFn f = [&map](const Vector& y) { return map(y); };
    Box inner = map.domain();
    if (!inner.contains(x + Vector::Constant(x.size(), h)) ||
        !inner.contains(x - Vector::Constant(x.size(), h))) {
      throw;
    }
    return {Generator{-1, fd_jacobian(f, x, h)}};
  }
}

void require_square(const NonsmoothMap& map) {
  if (!map.is_square()) throw InvalidArgument(map.name() + ": Newton methods need n == m");
}

}  // namespace

SubproblemResult solve_subproblem_graphical(const NonsmoothMap& map, const Vector& x,
                                            const SolverConfig& config) {
  require_square(map);
  const Vector hx = map(x);
  const Vector minus_h = -hx;
  const double tol = membership_tol(hx.norm(), config);
  SubproblemResult best;
  if (hx.norm() == 0.0) {
    best.direction = Vector::Zero(map.input_dim());
    return best;
  }
  std::vector<Vector> tried;
  bool found = false;
  for (const auto& g : candidates(map, x)) {
    const double rc = reciprocal_condition(g.matrix);
    if (rc < kEpsReg) {
      best.singular_candidates.emplace_back(g.id, rc);
      continue;
    }
    const Vector d = g.matrix.partialPivLu().solve(minus_h);
    if (!d.allFinite()) continue;
    tried.push_back(d);
    const double res = membership(map, x, minus_h, d);
    if (res > tol) continue;
    // Minimum-norm tie-break; ids arrive sorted so earlier ids win ties.
    if (!found || d.norm() < best.direction.norm()) {
      best.direction = d;
      best.element_id = g.id;
      best.membership_residual = res;
      best.rcond = rc;
      found = true;
    }
  }
  if (found) return best;

  // Fallback: derivative-free minimisation of the membership residual,
  // seeded by the rejected candidates and their midpoints.
  if (tried.empty()) {
    throw SubproblemFailure(map.name() + ": every candidate generator is singular");
  }
  std::vector<Vector> seeds = tried;
  for (std::size_t i = 0; i < tried.size(); ++i) {
    for (std::size_t j = i + 1; j < tried.size(); ++j) {
      for (double w : {0.25, 0.5, 0.75}) seeds.push_back((1.0 - w) * tried[i] + w * tried[j]);
    }
  }
  Vector d = seeds.front();
  double res = membership(map, x, minus_h, d);
  for (const auto& s : seeds) {
    const double r = membership(map, x, minus_h, s);
    if (r < res) {
      res = r;
      d = s;
    }
  }
  double step = 0.1 * std::max(d.norm(), hx.norm());
  const int n = map.input_dim();
  for (int it = 0; it < 2000 && res > tol && step > 1e-15 * std::max(1.0, d.norm()); ++it) {
    bool moved = false;
    for (int i = 0; i < n && !moved; ++i) {
      for (double sgn : {1.0, -1.0}) {
        Vector c = d;
        c[i] += sgn * step;
        const double r = membership(map, x, minus_h, c);
        if (r < res) {
          res = r;
          d = c;
          moved = true;
          break;
        }
      }
    }
    if (!moved) step *= 0.5;
  }
  if (res > tol) {
    std::ostringstream os;
    os << map.name() << ": no direction satisfies -H(x) in DH(x)(d) (best residual " << res
       << ", tolerance " << tol << ")";
    throw SubproblemFailure(os.str());
  }
  best.direction = d;
  best.element_id = -1;
  best.membership_residual = res;
  return best;
}

SubproblemResult solve_subproblem_semismooth(const NonsmoothMap& map, const Vector& x,
                                             const SolverConfig& config, Method source) {
  (void)config;
  require_square(map);
  if (!map.capabilities().lipschitz) {
    throw CapabilityMissing(map.name() + ": semismooth Newton needs a Lipschitz map");
  }
  if (source != Method::Bsub && source != Method::Clarke) {
    throw InvalidArgument("semismooth subproblem source must be bsub or clarke");
  }
  const Vector hx = map(x);
  const auto gens = source == Method::Bsub ? bsub_generators(map, x) : clarke_vertices(map, x);
  const Generator& g = gens.front();
  SubproblemResult out;
  out.rcond = reciprocal_condition(g.matrix);
  out.element_id = g.id;
  if (out.rcond < kEpsReg) {
    std::ostringstream os;
    os << map.name() << ": selected element " << g.id << " is singular (rcond " << out.rcond
       << ")";
    throw SingularElement(os.str(), out.rcond);
  }
  out.direction = g.matrix.partialPivLu().solve(-hx);
  out.membership_residual = (g.matrix * out.direction + hx).norm();
  return out;
}

SubproblemResult solve_subproblem_bdiff(const NonsmoothMap& map, const Vector& x,
                                        const SolverConfig& config) {
  const auto& caps = map.capabilities();
  if (!caps.directionally_differentiable || !caps.lipschitz) {
    throw CapabilityMissing(map.name() +
                            ": B-differentiable Newton needs a Lipschitz, directionally "
                            "differentiable map");
  }
  auto out = solve_subproblem_graphical(map, x, config);
  // On this class the graphical derivative is the singleton {H'(x; d)}, so
  // the two subproblems must agree.
  const auto dd = dirderiv_set(map, x, out.direction);
  if (dd.kind() != DerivativeValueSet::Kind::Singleton) {
    throw Error(map.name() + ": directional derivative is not single-valued");
  }
  const Vector hx = map(x);
  const double res = (dd.generators().front() + hx).norm();
  if (res > membership_tol(hx.norm(), config)) {
    throw SubproblemFailure(map.name() + ": H'(x; d) = -H(x) has no solution");
  }
  out.membership_residual = res;
  return out;
}

SolveTrace run_newton(const NonsmoothMap& map, const Vector& x0, const SolverConfig& config,
                      const std::optional<Vector>& root) {
  config.validate();
  require_finite(x0, "x0");
  if (x0.size() != map.input_dim()) throw InvalidArgument("x0 has wrong dimension");
  if (!map.in_domain(x0)) throw DomainExit(map.name() + ": x0 outside the domain box", x0);

  SolveTrace trace;
  trace.method = config.method;
  Vector x = x0;
  Vector hx = map(x);
  trace.iterates.push_back(x);
  trace.residual_norms.push_back(hx.norm());

  auto finish = [&](Termination t, std::string msg) {
    trace.termination = t;
    trace.message = std::move(msg);
  };

  bool done = false;
  for (int k = 0; k < config.max_iter && !done; ++k) {
    if (hx.norm() <= config.tol_residual) {
      finish(Termination::Converged, "residual below tolerance");
      done = true;
      break;
    }
    SubproblemResult sub;
    try {
      switch (config.method) {
        case Method::Graphical: sub = solve_subproblem_graphical(map, x, config); break;
        case Method::Bsub:
        case Method::Clarke: sub = solve_subproblem_semismooth(map, x, config, config.method); break;
        case Method::Bdiff: sub = solve_subproblem_bdiff(map, x, config); break;
      }
    } catch (const DomainExit& e) {
      finish(Termination::Diverged, e.what());
      done = true;
      break;
    } catch (const Error& e) {
      finish(Termination::SubproblemFailure, e.what());
      done = true;
      break;
    }
    const Vector next = x + sub.direction;
    if (!next.allFinite() || !map.in_domain(next)) {
      std::ostringstream os;
      os << "iterate left the domain at step " << k + 1;
      finish(Termination::Diverged, os.str());
      done = true;
      break;
    }
    const Vector hnext = map(next);
    if (!hnext.allFinite()) {
      finish(Termination::Diverged, "non-finite residual");
      done = true;
      break;
    }
    x = next;
    hx = hnext;
    trace.directions.push_back(sub.direction);
    trace.step_norms.push_back(sub.direction.norm());
    trace.element_ids.push_back(sub.element_id);
    trace.membership_residuals.push_back(sub.membership_residual);
    trace.iterates.push_back(x);
    trace.residual_norms.push_back(hx.norm());
    if (hx.norm() <= config.tol_residual) {
      finish(Termination::Converged, "residual below tolerance");
      done = true;
    } else if (sub.direction.norm() <= config.tol_step) {
      finish(Termination::Converged, "step below tolerance");
      done = true;
    }
  }
  if (!done) {
    if (hx.norm() <= config.tol_residual) {
      finish(Termination::Converged, "residual below tolerance");
    } else {
      finish(Termination::MaxIter, "iteration limit reached");
    }
  }

  if (root) {
    for (const auto& it : trace.iterates) trace.errors.push_back((it - *root).norm());
    for (std::size_t k = 0; k + 1 < trace.errors.size(); ++k) {
      if (trace.errors[k] > 0.0) trace.ratios.push_back(trace.errors[k + 1] / trace.errors[k]);
    }
  }
  return trace;
}

RateDiagnostics rate_diagnostics(const std::vector<double>& errors, double root_scale) {
  const double floor = 10.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, root_scale);
  RateDiagnostics out;
  for (double e : errors) {
    if (e > floor) ++out.valid_errors;
  }
  for (std::size_t k = 0; k + 1 < errors.size(); ++k) {
    if (errors[k] > floor) out.ratios.push_back(errors[k + 1] / errors[k]);
  }
  // Exact hits after a few steps carry no rate information.
  out.finite_termination =
      errors.size() >= 2 && errors.back() <= floor && out.valid_errors < 4;
  std::vector<double> lx, ly;
  for (std::size_t k = 0; k + 1 < errors.size(); ++k) {
    if (errors[k] > floor && errors[k + 1] > floor) {
      lx.push_back(std::log(errors[k]));
      ly.push_back(std::log(errors[k + 1]));
    }
  }
  if (lx.size() >= 2) {
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      mx += lx[i];
      my += ly[i];
    }
    mx /= lx.size();
    my /= lx.size();
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      sxy += (lx[i] - mx) * (ly[i] - my);
      sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    out.order = sxx > 0 ? sxy / sxx : std::numeric_limits<double>::quiet_NaN();
  } else {
    out.order = std::numeric_limits<double>::quiet_NaN();
  }
  if (out.finite_termination) {
    out.final_ratio = out.ratios.empty() ? 0.0 : out.ratios.back();
    out.superlinear = true;
    return out;
  }
  if (out.valid_errors < 4) {
    throw InsufficientData("rate diagnostics need at least four errors above 10 eps");
  }
  out.final_ratio = out.ratios.back();
  out.superlinear = out.final_ratio < kSuperlinearThreshold;
  return out;
}

RateDiagnostics rate_diagnostics(const SolveTrace& trace, const Vector& root) {
  if (trace.termination != Termination::Converged) {
    throw InsufficientData("rate diagnostics need a converged trace");
  }
  std::vector<double> errors;
  for (const auto& x : trace.iterates) errors.push_back((x - root).norm());
  return rate_diagnostics(errors, root.norm());
}

}  // namespace nsnewton
