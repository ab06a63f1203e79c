#include "nsnewton/regularity.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace nsnewton {

namespace {

// Cheap 1-norm estimate, used for the many hull samples.
double rcond_estimate(const Matrix& a) {
  if (a.rows() == 1) return a(0, 0) == 0.0 ? 0.0 : 1.0;
  return a.partialPivLu().rcond();
}

}  // namespace

BsubVerdict check_bsub_nonsingular(const NonsmoothMap& map, const Vector& x) {
  BsubVerdict out;
  for (const auto& g : bsub_generators(map, x)) {
    const double rc = reciprocal_condition(g.matrix);
    if (rc < out.min_rcond) out.min_rcond = rc;
    if (rc <= kEpsReg && out.nonsingular) {
      out.nonsingular = false;
      out.witness = g;
    }
  }
  return out;
}

std::string to_string(ClarkeVerdict v) {
  switch (v) {
    case ClarkeVerdict::CertifiedRegular: return "CertifiedRegular";
    case ClarkeVerdict::CertifiedIrregular: return "CertifiedIrregular";
    case ClarkeVerdict::Inconclusive: return "Inconclusive";
  }
  return "Unknown";
}

ClarkeResult check_clarke_nonsingular(const NonsmoothMap& map, const Vector& x, int n_samples,
                                      std::uint64_t seed) {
  const auto gens = clarke_vertices(map, x);
  ClarkeResult out;
  if (map.input_dim() == 1 && map.output_dim() == 1) {
    double lo = gens.front().matrix(0, 0), hi = lo;
    for (const auto& g : gens) {
      lo = std::min(lo, g.matrix(0, 0));
      hi = std::max(hi, g.matrix(0, 0));
    }
    out.method = "exact-interval";
    const double scale = std::max(std::abs(lo), std::abs(hi));
    if ((lo <= 0.0 && hi >= 0.0) || std::min(std::abs(lo), std::abs(hi)) <= kEpsReg * scale) {
      out.verdict = ClarkeVerdict::CertifiedIrregular;
      out.min_rcond = 0.0;
      out.witness = Matrix::Zero(1, 1);
    } else {
      out.verdict = ClarkeVerdict::CertifiedRegular;
    }
    return out;
  }
  if (!map.is_square()) throw InvalidArgument("check_clarke_nonsingular: map is not square");

  std::vector<double> dets;
  for (const auto& g : gens) {
    const double rc = reciprocal_condition(g.matrix);
    out.min_rcond = std::min(out.min_rcond, rc);
    if (rc <= kEpsReg) {
      out.verdict = ClarkeVerdict::CertifiedIrregular;
      out.method = "singular-vertex";
      out.witness = g.matrix;
      return out;
    }
    dets.push_back(g.matrix.determinant());
  }
  if (gens.size() == 1) {
    out.verdict = ClarkeVerdict::CertifiedRegular;
    out.method = "single-element";
    return out;
  }
  // det is continuous along each edge, so opposite signs at two vertices
  // force a singular convex combination.
  for (std::size_t i = 0; i < gens.size(); ++i) {
    for (std::size_t j = i + 1; j < gens.size(); ++j) {
      if ((dets[i] > 0.0) == (dets[j] > 0.0)) continue;
      double a = 0.0, b = 1.0;
      for (int it = 0; it < 200; ++it) {
        const double c = 0.5 * (a + b);
        const double dc = ((1.0 - c) * gens[i].matrix + c * gens[j].matrix).determinant();
        if ((dc > 0.0) == (dets[i] > 0.0)) a = c; else b = c;
      }
      const double t = 0.5 * (a + b);
      out.verdict = ClarkeVerdict::CertifiedIrregular;
      out.method = "determinant-sign-change";
      out.min_rcond = 0.0;
      out.witness = (1.0 - t) * gens[i].matrix + t * gens[j].matrix;
      return out;
    }
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> w(gens.size());
  for (int s = 0; s < n_samples; ++s) {
    double total = 0.0;
    for (auto& wi : w) {
      wi = -std::log(1.0 - u(rng));
      total += wi;
    }
    Matrix a = Matrix::Zero(map.output_dim(), map.input_dim());
    for (std::size_t i = 0; i < gens.size(); ++i) a += (w[i] / total) * gens[i].matrix;
    const double rc = rcond_estimate(a);
    out.min_rcond = std::min(out.min_rcond, rc);
    if (rc <= kEpsReg) {
      out.verdict = ClarkeVerdict::CertifiedIrregular;
      out.method = "sampled-singular";
      out.witness = a;
      return out;
    }
  }
  out.method = "sampled-hull";
  out.verdict = out.min_rcond >= 1e-6 ? ClarkeVerdict::CertifiedRegular : ClarkeVerdict::Inconclusive;
  return out;
}

ThibaultVerdict check_thibault_condition(const NonsmoothMap& map, const Vector& x,
                                         const sampling::LimitGrid& grid,
                                         std::vector<Vector> directions) {
  if (!map.capabilities().lipschitz) {
    throw CapabilityMissing(map.name() + ": Thibault condition needs a Lipschitz map");
  }
  if (directions.empty()) {
    directions = sampling::probe_directions(map.input_dim(), grid.random_directions, grid.seed);
  }
  ThibaultVerdict out;
  for (const auto& z : directions) {
    const double zn = z.norm();
    if (zn == 0.0) continue;
    const auto set = sampling::sample_thibault(map, x, z, grid);
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& v : set.generators()) {
      const double ratio = v.norm() / zn;
      if (ratio < out.min_ratio) {
        out.min_ratio = ratio;
        if (ratio < kTolThibault) {
          out.holds = false;
          out.witness_direction = z;
          out.witness_value = v;
        }
      }
      if (v.size() == 1) {
        lo = std::min(lo, v[0]);
        hi = std::max(hi, v[0]);
      }
    }
    // In 1-D the Thibault set is an interval, so straddling zero means 0 is in it.
    if (map.output_dim() == 1 && lo < 0.0 && hi > 0.0) {
      out.min_ratio = 0.0;
      if (out.holds) {
        out.holds = false;
        out.witness_direction = z;
        out.witness_value = vec({0.0});
      }
    }
  }
  return out;
}

DerivativeValueSet scalarized_coderivative_1d(const std::string& problem_id, double x, double z) {
  const auto& p = find_problem(problem_id);
  if (!p.scalarized) {
    throw NotRegistered(problem_id + ": no scalarized coderivative table registered");
  }
  return p.scalarized(x, z);
}

std::string to_string(Overall v) {
  switch (v) {
    case Overall::NecessaryFailed: return "NecessaryFailed";
    case Overall::SufficientHolds: return "SufficientHolds";
    case Overall::Inconclusive: return "Inconclusive";
  }
  return "Unknown";
}

RegularityReport regularity_report(const NonsmoothMap& map, const Vector& x,
                                   const ProblemSpec* problem) {
  RegularityReport rep;
  rep.point = x;
  rep.bsub = check_bsub_nonsingular(map, x);
  rep.clarke = check_clarke_nonsingular(map, x);
  rep.thibault = check_thibault_condition(map, x);
  if (problem && problem->scalarized && x.size() == 1) {
    for (double z : {1.0, -1.0}) rep.scalarized.push_back({z, problem->scalarized(x[0], z)});
  }
  if (!rep.bsub.nonsingular) {
    rep.overall = Overall::NecessaryFailed;
    rep.label = "NecessaryFailed";
  } else if (rep.clarke.verdict == ClarkeVerdict::CertifiedRegular || rep.thibault.holds) {
    rep.overall = Overall::SufficientHolds;
    rep.label = "SufficientHolds";
  } else {
    rep.overall = Overall::Inconclusive;
    rep.label = "NecessaryHolds-but-SufficientFails";
  }
  rep.note = "sufficient verdicts are sampling certificates, not proofs";
  return rep;
}

}  // namespace nsnewton
