// One PASS/FAIL line per acceptance criterion. Exit status is nonzero when
// a criterion fails that is not listed with --known-fail.

#include "oracles.hpp"

#include "nsnewton/kantorovich.hpp"
#include "nsnewton/problems.hpp"
#include "nsnewton/regularity.hpp"
#include "nsnewton/sampling.hpp"
#include "nsnewton/solvers.hpp"
#include "nsnewton/suites.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>
#include <string>

using namespace nsnewton;

namespace {

// Pinned tolerances.
constexpr double kExact = 1e-12;
constexpr double kInclusionTol = 1e-3;
constexpr double kOracleTol = 1e-6;
constexpr double kIterateTol = 1e-12;
constexpr double kOrderTarget = 2.0;
constexpr double kOrderTol = 0.3;
constexpr int kMaxIters = 25;
constexpr double kRatioBound = 0.1;
constexpr double kStartRadius = 0.1;
constexpr double kStaircaseSlope = 1.8;
constexpr double kNonlipRatio = 1e-3;
constexpr double kModulusLo = 1.8, kModulusHi = 2.2;
constexpr double kQuotientBound = 1.0 + 1e-6;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

const NonsmoothMap& map_of(const char* id) { return *find_problem(id).map; }

bool same_set(const DerivativeValueSet& a, const DerivativeValueSet& b) {
  return hausdorff(a, b) <= kExact;
}

void closed_forms(Outcome& o) {
  const auto& m = map_of("abs1d");
  const Vector zero = vec({0.0});
  const auto b = bsub(m, zero);
  o.require(b.size() == 2 && std::abs(b[0](0, 0) + 1.0) <= kExact && std::abs(b[1](0, 0) - 1.0) <= kExact,
            "bsub(0) = {-1, 1}");
  const auto c = clarke_apply(m, zero, vec({1.0}));
  o.require(c.kind() == DerivativeValueSet::Kind::Segment &&
                same_set(c, DerivativeValueSet::segment(vec({-1.0}), vec({1.0}))),
            "clarke image [-1, 1]");
  const auto d = dirderiv_set(m, zero, vec({1.0}));
  o.require(d.kind() == DerivativeValueSet::Kind::Singleton && same_set(d, DerivativeValueSet::singleton(vec({1.0}))),
            "dirderiv Singleton(1)");
  const auto p = scalarized_coderivative_1d("abs1d", 0.0, 1.0);
  const auto n = scalarized_coderivative_1d("abs1d", 0.0, -1.0);
  o.require(p.kind() == DerivativeValueSet::Kind::Segment &&
                hausdorff(p, DerivativeValueSet::segment(vec({-1.0}), vec({1.0}))) == 0.0,
            "scalarized z=1 is [-1, 1]");
  o.require(n.kind() == DerivativeValueSet::Kind::FiniteSet &&
                hausdorff(n, DerivativeValueSet::finite({vec({-1.0}), vec({1.0})})) == 0.0,
            "scalarized z=-1 is {-1, 1}");
  o.detail << "bsub " << b.size() << " elements, clarke " << c.describe() << ", dirderiv "
           << d.describe() << ", scalarized " << p.describe() << " / " << n.describe();
}

void inclusion_chains(Outcome& o) {
  double worst = 0.0;
  std::string worst_id;
  int problems = 0;
  for (const auto& p : corpus()) {
    if (!p.map->capabilities().lipschitz) continue;
    const auto rep = inclusion_suite(p, 50, 0xC0FFEE, kInclusionTol);
    const double m = std::max({rep.max_bsub_in_thibault, rep.max_thibault_in_clarke, rep.max_dirderiv_in_clarke});
    if (m >= worst) {
      worst = m;
      worst_id = p.id;
    }
    ++problems;
    o.require(rep.cases >= 50 && rep.all_hold, p.id);
  }
  o.detail << problems << " problems x 50 cases, worst excess " << worst << " (" << worst_id << ")";
}

void oracle_equivalence_all(Outcome& o) {
  double worst = 0.0;
  std::string worst_id;
  int problems = 0;
  for (const auto& p : corpus()) {
    if (!p.map->capabilities().lipschitz || !p.map->hooks().dirderiv) continue;
    const auto rep = oracle_equivalence(p, 100);
    if (rep.max_gap >= worst) {
      worst = rep.max_gap;
      worst_id = p.id;
    }
    ++problems;
    o.require(rep.cases == 100 && rep.max_gap <= kOracleTol, p.id);
  }
  o.detail << problems << " problems x 100 cases, worst gap " << worst << " (" << worst_id << ")";
}

void smooth_reduction(Outcome& o) {
  const auto f1 = [](const oracle::Vec& x) { return oracle::Vec::Constant(1, x[0] * x[0] - 1.0); };
  const auto j1 = [](const oracle::Vec& x) { return oracle::Mat::Constant(1, 1, 2.0 * x[0]); };
  const auto f2 = [](const oracle::Vec& x) {
    oracle::Vec r(2);
    r << x[0] * x[0] + x[1] * x[1] - 2.0, x[0] * x[0] - x[1];
    return r;
  };
  const auto j2 = [](const oracle::Vec& x) {
    oracle::Mat j(2, 2);
    j << 2 * x[0], 2 * x[1], 2 * x[0], -1.0;
    return j;
  };
  double worst_dev = 0.0, lo_order = 10.0, hi_order = 0.0;
  int runs = 0;
  for (const char* id : {"quad1d", "quad2d"}) {
    const auto& p = find_problem(id);
    for (const auto& x0 : p.recommended_x0) {
      for (Method m : {Method::Graphical, Method::Bsub, Method::Clarke, Method::Bdiff}) {
        SolverConfig c;
        c.method = m;
        const Vector root = p.known_roots.front();
        const auto t = run_newton(*p.map, x0, c, root);
        ++runs;
        o.require(t.termination == Termination::Converged, std::string(id) + " " + to_string(m) + " converged");
        const auto ref = x0.size() == 1 ? oracle::classical_newton(f1, j1, x0, t.iterations())
                                        : oracle::classical_newton(f2, j2, x0, t.iterations());
        for (int k = 0; k <= t.iterations(); ++k) {
          worst_dev = std::max(worst_dev, (t.iterates[k] - ref[k]).norm());
        }
        // The order is measured on runs with enough iterations to fit it.
        try {
          const auto r = rate_diagnostics(t, root);
          if (std::isfinite(r.order) && r.valid_errors >= 4) {
            lo_order = std::min(lo_order, r.order);
            hi_order = std::max(hi_order, r.order);
          }
        } catch (const InsufficientData&) {
        }
      }
    }
  }
  o.require(worst_dev <= kIterateTol, "iterates match classical Newton");
  o.require(hi_order > 0.0 && std::abs(lo_order - kOrderTarget) <= kOrderTol &&
                std::abs(hi_order - kOrderTarget) <= kOrderTol,
            "order 2 +- 0.3");
  o.detail << runs << " runs, max iterate deviation " << worst_dev << ", order in [" << lo_order
           << ", " << hi_order << "]";
}

void semismooth_superlinear(Outcome& o) {
  int runs = 0, max_it = 0;
  double worst_ratio = 0.0;
  for (const char* id : {"abs1d", "affabs_2", "affabs_10", "ncp_min_2d"}) {
    const auto& p = find_problem(id);
    const Vector root = p.known_roots.front();
    for (const auto& x0 : p.recommended_x0) {
      if ((x0 - root).norm() > kStartRadius) continue;
      for (Method m : {Method::Graphical, Method::Bsub, Method::Clarke, Method::Bdiff}) {
        SolverConfig c;
        c.method = m;
        const auto t = run_newton(*p.map, x0, c, root);
        ++runs;
        max_it = std::max(max_it, t.iterations());
        const bool conv = t.termination == Termination::Converged && t.iterations() <= kMaxIters;
        o.require(conv, std::string(id) + " " + to_string(m) + " converged");
        if (!conv) continue;
        try {
          const auto r = rate_diagnostics(t, root);
          worst_ratio = std::max(worst_ratio, r.final_ratio);
          o.require(r.final_ratio < kRatioBound, std::string(id) + " final ratio");
        } catch (const InsufficientData& e) {
          o.require(false, std::string(id) + ": " + e.what());
        }
      }
    }
  }
  o.require(runs > 0, "at least one start within radius 0.1");
  o.detail << runs << " runs, max iterations " << max_it << ", worst final ratio " << worst_ratio;
}

void beyond_semismooth(Outcome& o) {
  const auto& m = map_of("staircase");
  SolverConfig c;
  const auto t = run_newton(m, vec({0.6}), c, vec({0.0}));
  o.detail << "graphical from 0.6: " << to_string(t.termination) << " after " << t.iterations()
           << " iterations (" << t.message << ")";
  bool superlinear = false;
  if (t.termination == Termination::Converged) {
    try {
      const auto r = rate_diagnostics(t, vec({0.0}));
      superlinear = r.superlinear;
      o.detail << ", final ratio " << r.final_ratio;
    } catch (const InsufficientData& e) {
      o.detail << ", " << e.what();
    }
  }
  o.require(superlinear, "superlinear convergence from 0.6");
  int flagged = 0;
  for (int k = 1; k <= 10; ++k) {
    const auto r = sampling::semismoothness_test(m, vec({std::ldexp(1.0, -k)}));
    flagged += r.not_directionally_differentiable;
  }
  o.require(flagged == 10, "NotDirectionallyDifferentiable at 2^-k");
  o.detail << "; NDD flagged at " << flagged << "/10 points 2^-k";
}

void residual_slopes(Outcome& o) {
  const auto& st = find_problem("staircase");
  std::vector<Vector> path;
  for (int k = 3; k <= 18; ++k) path.push_back(vec({std::ldexp(1.0, -k)}));
  const auto c = sampling::h2_residual_curve(*st.map, vec({0.0}), path);
  o.require(c.slope >= kStaircaseSlope, "staircase slope >= 1.8");
  const auto& nl = find_problem("nonlip2d");
  const auto n = sampling::h2_residual_curve(*nl.map, nl.known_roots.front(), nl.h2_path);
  bool monotone = true;
  double at_1e6 = std::numeric_limits<double>::infinity(), scale_used = 0.0;
  for (std::size_t i = 0; i < n.size(); ++i) {
    const double rel = n.residuals[i] / n.scales[i];
    if (i > 0 && rel >= n.residuals[i - 1] / n.scales[i - 1]) monotone = false;
    // Scale of order 1e-6: the first path point at or below 1e-6 * sqrt(2).
    if (scale_used == 0.0 && n.scales[i] <= 1e-6 * std::sqrt(2.0) * (1 + 1e-12)) {
      at_1e6 = rel;
      scale_used = n.scales[i];
    }
  }
  o.require(monotone, "nonlip2d residual/scale decreasing");
  o.require(at_1e6 < kNonlipRatio, "nonlip2d residual/scale < 1e-3 at scale 1e-6");
  o.detail << "staircase slope " << c.slope << "; nonlip2d residual/scale " << at_1e6
           << " at scale " << scale_used << ", monotone " << (monotone ? "yes" : "no");
}

void regularity_gap(Outcome& o) {
  const auto& ab = map_of("abs1d");
  const bool bs = check_bsub_nonsingular(ab, vec({0.0})).nonsingular;
  const auto cl = check_clarke_nonsingular(ab, vec({0.0}));
  const auto mu_ab = sampling::estimate_metric_regularity_modulus(ab, Box::cube(1, -1, 1));
  o.require(bs, "abs1d bsub nonsingular");
  o.require(cl.verdict == ClarkeVerdict::CertifiedIrregular, "abs1d clarke irregular");
  o.require(mu_ab.infinite, "abs1d modulus infinite");
  const auto& h = map_of("halfabs");
  const auto ch = check_clarke_nonsingular(h, vec({0.0}));
  const auto mu_h = sampling::estimate_metric_regularity_modulus(h, Box::cube(1, -1, 1));
  o.require(ch.verdict == ClarkeVerdict::CertifiedRegular, "halfabs clarke regular");
  o.require(!mu_h.infinite && mu_h.mu >= kModulusLo && mu_h.mu <= kModulusHi, "halfabs modulus in [1.8, 2.2]");
  o.detail << "abs1d: bsub nonsingular " << bs << ", clarke " << to_string(cl.verdict) << ", mu "
           << (mu_ab.infinite ? "Infinite" : std::to_string(mu_ab.mu)) << "; halfabs: clarke "
           << to_string(ch.verdict) << ", mu " << mu_h.mu;
}

void kantorovich_audit(Outcome& o) {
  const auto lin = kantorovich_check(map_of("linear2x"), vec({1.0}), 1.0);
  double min_slack = std::numeric_limits<double>::infinity();
  for (const auto& row : lin.audit) min_slack = std::min(min_slack, row.slack);
  o.require(lin.pass, "linear2x passes");
  o.require(!lin.audit.empty() && min_slack >= 0.0, "error estimate slack >= 0");
  const auto ab = kantorovich_check(map_of("abs1d"), vec({0.5}), 1.0);
  o.require(!ab.pass && ab.mu_infinite, "abs1d fails with infinite modulus");
  o.detail << "linear2x: pass " << lin.pass << ", mu " << lin.mu << ", alpha " << lin.alpha << ", "
           << lin.audit.size() << " audited iterates, min slack " << min_slack << "; abs1d: pass "
           << ab.pass << ", mu " << (ab.mu_infinite ? "Infinite" : std::to_string(ab.mu));
}

void directional_boundedness(Outcome& o) {
  const auto& m = map_of("xsin1x");
  const std::vector<Vector> dirs{vec({1.0}), vec({-1.0})};
  const auto b = sampling::check_directional_boundedness(m, vec({0.0}), dirs);
  const auto d = sampling::check_directional_differentiability(m, vec({0.0}), dirs);
  o.require(b.bounded && b.max_quotient <= kQuotientBound, "bounded with max quotient <= 1 + 1e-6");
  o.require(!d.directionally_differentiable, "not directionally differentiable");
  o.detail << "bounded " << b.bounded << ", max quotient " << b.max_quotient
           << ", tail diameter " << d.max_tail_diameter;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> known;
  CLI::App app{"Acceptance criteria"};
  app.add_option("--known-fail", known, "Criteria whose failure does not affect the exit status");
  CLI11_PARSE(app, argc, argv);
  const std::set<int> known_set(known.begin(), known.end());

  const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria{
      {"closed forms for |x| at 0", closed_forms},
      {"inclusion chains on the Lipschitz corpus", inclusion_chains},
      {"closed-form dirderiv vs sampling oracle", oracle_equivalence_all},
      {"smooth reduction to classical Newton", smooth_reduction},
      {"superlinear convergence on the semismooth corpus", semismooth_superlinear},
      {"staircase convergence from 0.6 beyond semismoothness", beyond_semismooth},
      {"first-order residual slopes", residual_slopes},
      {"regularity gap", regularity_gap},
      {"Kantorovich audit", kantorovich_audit},
      {"directional boundedness of x sin(1/x)", directional_boundedness},
  };
  int unexpected = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      criteria[i].second(o);
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const int id = static_cast<int>(i) + 1;
    std::printf("%s %d %s: %s (%.2fs)\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first.c_str(),
                o.detail.str().c_str(), secs);
    if (!o.pass && !known_set.count(id)) ++unexpected;
  }
  return unexpected == 0 ? 0 : 1;
}
