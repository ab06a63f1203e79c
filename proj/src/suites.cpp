#include "nsnewton/suites.hpp"

#include "nsnewton/sampling.hpp"

#include <algorithm>
#include <random>

namespace nsnewton {

std::vector<Vector> random_points(const Box& box, int count, std::uint64_t seed,
                                  double margin) {
  const Box inner = box.shrunk(margin);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Vector> out;
  for (int k = 0; k < count; ++k) {
    Vector x(inner.dim());
    for (int i = 0; i < inner.dim(); ++i) {
      x[i] = inner.lower[i] + u(rng) * (inner.upper[i] - inner.lower[i]);
    }
    out.push_back(x);
  }
  return out;
}

namespace {

std::vector<Vector> random_units(int n, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<Vector> out;
  for (int k = 0; k < count; ++k) {
    Vector z(n);
    do {
      for (int i = 0; i < n; ++i) z[i] = g(rng);
    } while (z.norm() == 0.0);
    out.push_back(z.normalized());
  }
  return out;
}

}  // namespace

InclusionReport inclusion_suite(const ProblemSpec& problem, int samples, std::uint64_t seed,
                                double tol) {
  const auto& map = *problem.map;
  if (!map.capabilities().lipschitz) {
    throw CapabilityMissing(problem.id + ": inclusion chain needs a Lipschitz map");
  }
  InclusionReport rep;
  rep.problem = problem.id;
  auto xs = random_points(map.domain(), samples, seed);
  const auto zs = random_units(map.input_dim(), samples, seed ^ 0xA5A5A5A5ULL);
  for (std::size_t i = 0; i < problem.kink_points.size() && 5 * i < xs.size(); ++i) {
    xs[5 * i] = problem.kink_points[i];
  }
  double worst_total = -1.0;
  for (int k = 0; k < samples; ++k) {
    InclusionCase c;
    c.x = xs[k];
    c.z = zs[k];
    const auto clarke = clarke_apply(map, c.x, c.z);
    const auto thibault = sampling::sample_thibault(map, c.x, c.z);
    const auto bimage = sampling::sample_bsub_image(map, c.x, c.z);
    const auto dd = sampling::dirderiv_or_sample(map, c.x, c.z);
    c.bsub_in_thibault = excess(bimage, thibault);
    c.thibault_in_clarke = excess(thibault, clarke);
    c.dirderiv_in_clarke = excess(dd, clarke);
    rep.max_bsub_in_thibault = std::max(rep.max_bsub_in_thibault, c.bsub_in_thibault);
    rep.max_thibault_in_clarke = std::max(rep.max_thibault_in_clarke, c.thibault_in_clarke);
    rep.max_dirderiv_in_clarke = std::max(rep.max_dirderiv_in_clarke, c.dirderiv_in_clarke);
    const double total = std::max({c.bsub_in_thibault, c.thibault_in_clarke, c.dirderiv_in_clarke});
    if (total > worst_total) {
      worst_total = total;
      rep.worst = c;
    }
    ++rep.cases;
  }
  rep.all_hold = rep.max_bsub_in_thibault <= tol && rep.max_thibault_in_clarke <= tol &&
                 rep.max_dirderiv_in_clarke <= tol;
  return rep;
}

OracleReport oracle_equivalence(const ProblemSpec& problem, int samples, std::uint64_t seed) {
  const auto& map = *problem.map;
  OracleReport rep;
  rep.problem = problem.id;
  const auto xs = random_points(map.domain(), samples, seed);
  const auto zs = random_units(map.input_dim(), samples, seed ^ 0x5A5A5A5AULL);
  for (int k = 0; k < samples; ++k) {
    const auto closed = dirderiv_set(map, xs[k], zs[k]);
    const auto sampled = sampling::sample_restrictive_derivative(map, xs[k], zs[k]);
    const double gap = hausdorff(closed, sampled);
    if (gap > rep.max_gap || !rep.worst_x) {
      rep.max_gap = std::max(rep.max_gap, gap);
      rep.worst_x = xs[k];
      rep.worst_z = zs[k];
    }
    ++rep.cases;
  }
  return rep;
}

}  // namespace nsnewton
