#include "cli.hpp"

#include "nsnewton/kantorovich.hpp"
#include "nsnewton/regularity.hpp"
#include "nsnewton/sampling.hpp"
#include "nsnewton/suites.hpp"

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

namespace nsnewton::cli {

namespace {

std::shared_ptr<spdlog::logger> logger() {
  static const auto log = [] {
    auto l = std::make_shared<spdlog::logger>("nsnewton",
                                              std::make_shared<spdlog::sinks::stderr_sink_mt>());
    const char* env = std::getenv("NSNEWTON_LOG");
    const std::string level = env ? env : "off";
    if (level == "debug") {
      l->set_level(spdlog::level::debug);
    } else if (level == "info") {
      l->set_level(spdlog::level::info);
    } else {
      l->set_level(spdlog::level::off);
    }
    return l;
  }();
  return log;
}

// Non-finite doubles are spelled out so records round-trip exactly.
Json num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double num_from(const Json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
  }
  throw InvalidArgument("expected a number, got " + j.dump());
}

Json series(const std::vector<double>& xs) {
  Json a = Json::array();
  for (double x : xs) a.push_back(num(x));
  return a;
}

std::vector<double> series_from(const Json& j) {
  std::vector<double> out;
  for (const auto& e : j) out.push_back(num_from(e));
  return out;
}

Json matrix_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(num(m(i, k)));
    rows.push_back(row);
  }
  return rows;
}

Json generators_json(const std::vector<Generator>& gens) {
  Json a = Json::array();
  for (const auto& g : gens) a.push_back({{"id", g.id}, {"matrix", matrix_json(g.matrix)}});
  return a;
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string to_string(sampling::SemismoothVerdict v) {
  return v == sampling::SemismoothVerdict::Semismooth ? "Semismooth" : "NotSemismooth";
}

const Vector* nearest_root(const ProblemSpec& p, const Vector& x) {
  const Vector* best = nullptr;
  for (const auto& r : p.known_roots) {
    if (r.size() != x.size()) continue;
    if (!best || (r - x).norm() < (*best - x).norm()) best = &r;
  }
  return best;
}

Json rate_json(const RateDiagnostics& r) {
  return {{"order", num(r.order)},
          {"final_ratio", num(r.final_ratio)},
          {"superlinear", r.superlinear},
          {"finite_termination", r.finite_termination},
          {"valid_errors", r.valid_errors},
          {"ratios", series(r.ratios)}};
}

RateDiagnostics rate_from(const Json& j) {
  RateDiagnostics r;
  r.order = num_from(j.at("order"));
  r.final_ratio = num_from(j.at("final_ratio"));
  r.superlinear = j.at("superlinear").get<bool>();
  r.finite_termination = j.at("finite_termination").get<bool>();
  r.valid_errors = j.at("valid_errors").get<int>();
  r.ratios = series_from(j.at("ratios"));
  return r;
}

Json trace_json(const SolveTrace& t) {
  Json iterates = Json::array();
  for (const auto& x : t.iterates) iterates.push_back(vector_json(x));
  Json directions = Json::array();
  for (const auto& d : t.directions) directions.push_back(vector_json(d));
  return {{"method", to_string(t.method)},
          {"termination", to_string(t.termination)},
          {"message", t.message},
          {"iterations", t.iterations()},
          {"final_iterate", t.iterates.empty() ? Json::array() : vector_json(t.final_iterate())},
          {"iterates", iterates},
          {"directions", directions},
          {"residual_norms", series(t.residual_norms)},
          {"step_norms", series(t.step_norms)},
          {"element_ids", t.element_ids},
          {"membership_residuals", series(t.membership_residuals)},
          {"errors", series(t.errors)},
          {"ratios", series(t.ratios)}};
}

SolveTrace trace_from(const Json& j) {
  SolveTrace t;
  t.method = parse_method(j.at("method").get<std::string>());
  t.termination = parse_termination(j.at("termination").get<std::string>());
  t.message = j.at("message").get<std::string>();
  for (const auto& x : j.at("iterates")) t.iterates.push_back(vector_from_json(x));
  for (const auto& d : j.at("directions")) t.directions.push_back(vector_from_json(d));
  t.residual_norms = series_from(j.at("residual_norms"));
  t.step_norms = series_from(j.at("step_norms"));
  t.element_ids = j.at("element_ids").get<std::vector<int>>();
  t.membership_residuals = series_from(j.at("membership_residuals"));
  t.errors = series_from(j.at("errors"));
  t.ratios = series_from(j.at("ratios"));
  return t;
}

Json config_json(const RunConfig& c) {
  return {{"tol", num(c.tol)},
          {"tol_step", num(c.tol_step)},
          {"max_iter", c.max_iter},
          {"eta", num(c.eta)},
          {"seed", c.seed}};
}

RunConfig config_from(const Json& j) {
  RunConfig c;
  c.tol = num_from(j.at("tol"));
  c.tol_step = num_from(j.at("tol_step"));
  c.max_iter = j.at("max_iter").get<int>();
  c.eta = num_from(j.at("eta"));
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

// Runs `body` and records either its JSON or the error it threw.
template <class F>
Json guarded(F&& body) {
  try {
    return body();
  } catch (const Error& e) {
    return {{"error", e.what()}};
  }
}

// ---------------------------------------------------------------------------
// Subcommands

struct Options {
  std::string problem;
  std::string method = "graphical";
  std::string x0;
  std::string root;
  std::string out;
  std::string format = "json";
  RunConfig run;
  bool timestamps = false;

  std::string point;
  std::string direction;

  bool kantorovich = false;
  bool inclusions = false;
  bool h2 = false;
  bool oracle = false;
  double radius = 0.0;
  int samples = 0;

  int jobs = 0;
  std::string problems;
  std::string methods;
};

class UsageError : public Error {
 public:
  using Error::Error;
};

const ProblemSpec& require_problem(const Options& o) {
  if (o.problem.empty()) throw UsageError("--problem is required");
  try {
    return find_problem(o.problem);
  } catch (const NotRegistered& e) {
    throw UsageError(e.what());
  }
}

Vector require_vector(const std::string& text, const char* flag, int dim) {
  if (text.empty()) throw UsageError(std::string(flag) + " is required");
  Vector v;
  try {
    v = parse_vector(text);
  } catch (const InvalidArgument& e) {
    throw UsageError(std::string(flag) + ": " + e.what());
  }
  if (v.size() != dim) {
    throw UsageError(std::string(flag) + ": expected " + std::to_string(dim) + " components");
  }
  return v;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

void emit(const Options& o, const std::string& text, std::ostream& out) {
  if (o.out.empty()) {
    out << text;
    return;
  }
  std::ofstream f(o.out);
  if (!f) throw UsageError("cannot open " + o.out + " for writing");
  f << text;
}

int cmd_solve(const Options& o, std::ostream& out) {
  const auto& p = require_problem(o);
  Method method;
  try {
    method = parse_method(o.method);
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }
  const int n = p.map->input_dim();
  const Vector x0 = require_vector(o.x0, "--x0", n);
  std::optional<Vector> root;
  if (!o.root.empty()) root = require_vector(o.root, "--root", n);
  if (!p.map->in_domain(x0)) throw UsageError("--x0 lies outside the domain of " + p.id);
  logger()->info("solve {} with {} from {}", p.id, o.method, o.x0);
  const auto rec = make_run_record(p, method, x0, o.run, root, o.timestamps);
  for (int k = 0; k < static_cast<int>(rec.trace.residual_norms.size()); ++k) {
    logger()->debug("k={} |H|={:.3e}", k, rec.trace.residual_norms[k]);
  }
  logger()->info("{} after {} iterations", to_string(rec.trace.termination),
                 rec.trace.iterations());
  emit(o, o.format == "csv" ? to_csv(rec) : to_json(rec).dump(2) + "\n", out);
  return rec.trace.termination == Termination::Converged ? kExitConverged : kExitNotConverged;
}

Json modulus_json(const NonsmoothMap& map, const Vector& x) {
  return guarded([&]() -> Json {
    const Box region = Box::around(x, 0.5).intersect(map.domain());
    const auto est = sampling::estimate_metric_regularity_modulus(map, region);
    Json j = {{"region_lower", vector_json(region.lower)},
              {"region_upper", vector_json(region.upper)},
              {"infinite", est.infinite},
              {"unsupported", est.unsupported},
              {"mu", num(est.infinite ? std::numeric_limits<double>::infinity() : est.mu)},
              {"pairs", est.pairs}};
    if (est.empty_preimage_target) j["empty_preimage_target"] = vector_json(*est.empty_preimage_target);
    return j;
  });
}

Json regularity_json(const RegularityReport& r) {
  Json j;
  j["bsub_nonsingular"] = r.bsub.nonsingular;
  j["bsub_min_rcond"] = num(r.bsub.min_rcond);
  j["clarke"] = {{"verdict", to_string(r.clarke.verdict)},
                 {"method", r.clarke.method},
                 {"min_rcond", num(r.clarke.min_rcond)}};
  if (r.clarke.witness) j["clarke"]["witness"] = matrix_json(*r.clarke.witness);
  j["thibault"] = {{"holds", r.thibault.holds}, {"min_ratio", num(r.thibault.min_ratio)}};
  Json sc = Json::array();
  for (const auto& e : r.scalarized) sc.push_back({{"z", num(e.z)}, {"value", to_json(e.value)}});
  j["scalarized_coderivative"] = sc;
  j["overall"] = to_string(r.overall);
  j["label"] = r.label;
  j["note"] = r.note;
  return j;
}

int cmd_analyze(const Options& o, std::ostream& out) {
  const auto& p = require_problem(o);
  const auto& map = *p.map;
  const int n = map.input_dim();
  const Vector x = require_vector(o.point, "--point", n);
  if (!map.in_domain(x)) throw UsageError("--point lies outside the domain of " + p.id);
  const Vector d = o.direction.empty() ? Vector(Vector::Ones(n)) : require_vector(o.direction, "--direction", n);
  sampling::LimitGrid grid;
  grid.seed = o.run.seed;
  logger()->info("analyze {} at {}", p.id, o.point);

  Json j;
  j["schema"] = "nsnewton.analyze/1";
  j["problem"] = p.id;
  j["point"] = vector_json(x);
  j["direction"] = vector_json(d);
  j["value"] = vector_json(map(x));
  j["dirderiv"] = guarded([&]() -> Json {
    Json r = to_json(sampling::dirderiv_or_sample(map, x, d, grid));
    r["source"] = map.hooks().dirderiv ? "analytic" : "sampled";
    return r;
  });
  j["graphical_sampled"] = guarded([&] { return to_json(sampling::sample_graphical_derivative(map, x, d, grid)); });
  const bool lipschitz = map.capabilities().lipschitz;
  if (lipschitz) {
    j["thibault_sampled"] = guarded([&] { return to_json(sampling::sample_thibault(map, x, d, grid)); });
  }
  j["bsub"] = guarded([&] { return generators_json(bsub_generators(map, x)); });
  j["clarke_vertices"] = guarded([&] { return generators_json(clarke_vertices(map, x)); });
  j["clarke_image"] = guarded([&] { return to_json(clarke_apply(map, x, d)); });
  const std::vector<Vector> dirs{d, -d};
  j["directional_boundedness"] = guarded([&]() -> Json {
    const auto v = sampling::check_directional_boundedness(map, x, dirs, grid);
    return {{"bounded", v.bounded},
            {"max_quotient", num(v.max_quotient)},
            {"growth_exponent", num(v.growth_exponent)},
            {"reason", v.reason}};
  });
  j["directional_differentiability"] = guarded([&]() -> Json {
    const auto v = sampling::check_directional_differentiability(map, x, dirs, grid);
    return {{"directionally_differentiable", v.directionally_differentiable},
            {"max_tail_diameter", num(v.max_tail_diameter)}};
  });
  if (lipschitz) {
    j["semismoothness"] = guarded([&]() -> Json {
      const auto s = sampling::semismoothness_test(map, x, grid);
      return {{"verdict", to_string(s.verdict)},
              {"not_directionally_differentiable", s.not_directionally_differentiable},
              {"final_ratio", num(s.final_ratio)},
              {"slope", num(s.curve.slope)}};
    });
    j["regularity"] = guarded([&] { return regularity_json(regularity_report(map, x, &p)); });
  }
  j["metric_regularity_modulus"] = modulus_json(map, x);
  emit(o, j.dump(2) + "\n", out);
  return kExitConverged;
}

Json kantorovich_json(const NonsmoothMap& map, const Vector& x0, double r, std::uint64_t seed,
                      bool& passed) {
  KantorovichOptions opts;
  opts.seed = seed;
  Json j;
  try {
    const auto rep = kantorovich_check(map, x0, r, opts);
    j = {{"x0", vector_json(rep.x0)},
         {"r", num(rep.r)},
         {"mu", num(rep.mu_infinite ? std::numeric_limits<double>::infinity() : rep.mu)},
         {"mu_infinite", rep.mu_infinite},
         {"mu_unsupported", rep.mu_unsupported},
         {"alpha", num(rep.alpha)},
         {"alpha_stated_form", num(rep.alpha_stated_form)},
         {"h0_norm", num(rep.h0_norm)},
         {"condition_a", rep.condition_a},
         {"condition_b", rep.condition_b},
         {"max_derivative_ratio", num(rep.max_derivative_ratio)},
         {"condition_c", rep.condition_c},
         {"pass", rep.pass},
         {"failure", rep.failure}};
    Json audit = Json::array();
    for (const auto& row : rep.audit) {
      audit.push_back({{"k", row.k},
                       {"error", num(row.error)},
                       {"bound", num(row.bound)},
                       {"slack", num(row.slack)}});
    }
    j["audit"] = audit;
    j["audit_holds"] = rep.audit_holds;
    if (rep.trace) j["trace"] = trace_json(*rep.trace);
    passed = rep.pass && rep.audit_holds;
  } catch (const RegionExit& e) {
    j = {{"pass", true}, {"region_exit", e.iteration()}, {"error", e.what()}};
    passed = false;
  }
  return j;
}

int cmd_check(const Options& o, std::ostream& out) {
  const auto& p = require_problem(o);
  const auto& map = *p.map;
  if (!o.kantorovich && !o.inclusions && !o.h2 && !o.oracle) {
    throw UsageError("check needs at least one of --kantorovich, --inclusions, --h2, --oracle");
  }
  Json j;
  j["schema"] = "nsnewton.check/1";
  j["problem"] = p.id;
  bool all = true;
  if (o.kantorovich) {
    const Vector x0 = require_vector(o.x0, "--x0", map.input_dim());
    if (!(o.radius > 0.0)) throw UsageError("--kantorovich needs --r > 0");
    bool passed = false;
    j["kantorovich"] = kantorovich_json(map, x0, o.radius, o.run.seed, passed);
    all = all && passed;
  }
  if (o.inclusions) {
    if (!map.capabilities().lipschitz) throw UsageError(p.id + " is not Lipschitz");
    const int samples = o.samples > 0 ? o.samples : 50;
    const auto rep = inclusion_suite(p, samples, o.run.seed);
    j["inclusions"] = {{"cases", rep.cases},
                       {"tolerance", num(kTolHausdorff)},
                       {"max_bsub_in_thibault", num(rep.max_bsub_in_thibault)},
                       {"max_thibault_in_clarke", num(rep.max_thibault_in_clarke)},
                       {"max_dirderiv_in_clarke", num(rep.max_dirderiv_in_clarke)},
                       {"all_hold", rep.all_hold}};
    if (rep.worst) {
      j["inclusions"]["worst_x"] = vector_json(rep.worst->x);
      j["inclusions"]["worst_z"] = vector_json(rep.worst->z);
    }
    all = all && rep.all_hold;
  }
  if (o.oracle) {
    if (!map.hooks().dirderiv) throw UsageError(p.id + " has no analytic directional derivative");
    const int samples = o.samples > 0 ? o.samples : 100;
    const auto rep = oracle_equivalence(p, samples, o.run.seed);
    const bool ok = rep.max_gap <= kTolFd;
    j["oracle"] = {{"cases", rep.cases}, {"max_gap", num(rep.max_gap)},
                   {"tolerance", num(kTolFd)}, {"agree", ok}};
    all = all && ok;
  }
  if (o.h2) {
    if (p.known_roots.empty() || p.h2_path.empty()) {
      throw UsageError(p.id + " registers no root path for the residual test");
    }
    const auto curve = sampling::h2_residual_curve(map, p.known_roots.front(), p.h2_path);
    std::vector<double> rel;
    bool monotone = true;
    for (std::size_t k = 0; k < curve.size(); ++k) {
      rel.push_back(curve.residuals[k] / curve.scales[k]);
      if (k > 0 && rel[k] > rel[k - 1]) monotone = false;
    }
    const bool ok = curve.identically_zero || curve.slope > 1.0;
    j["h2"] = {{"root", vector_json(p.known_roots.front())},
               {"scales", series(curve.scales)},
               {"residuals", series(curve.residuals)},
               {"residual_over_scale", series(rel)},
               {"monotone_decrease", monotone},
               {"identically_zero", curve.identically_zero},
               {"slope", num(curve.slope)},
               {"superlinear_residual", ok}};
    all = all && ok;
  }
  j["pass"] = all;
  emit(o, j.dump(2) + "\n", out);
  return all ? kExitConverged : kExitNotConverged;
}

struct BenchJob {
  const ProblemSpec* problem;
  Method method;
  int x0_index;
};

int cmd_bench(const Options& o, std::ostream& out) {
  std::vector<const ProblemSpec*> problems;
  if (o.problems.empty()) {
    for (const auto& p : corpus()) {
      if (!p.recommended_x0.empty()) problems.push_back(&p);
    }
  } else {
    for (const auto& id : split_list(o.problems)) {
      try {
        problems.push_back(&find_problem(id));
      } catch (const NotRegistered& e) {
        throw UsageError(e.what());
      }
    }
  }
  std::vector<Method> methods;
  try {
    for (const auto& m : split_list(o.methods.empty() ? "graphical,bsub,clarke,bdiff" : o.methods)) {
      methods.push_back(parse_method(m));
    }
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }
  std::vector<BenchJob> jobs;
  for (const auto* p : problems) {
    for (Method m : methods) {
      for (int i = 0; i < static_cast<int>(p->recommended_x0.size()); ++i) jobs.push_back({p, m, i});
    }
  }
  std::sort(jobs.begin(), jobs.end(), [](const BenchJob& a, const BenchJob& b) {
    if (a.problem->id != b.problem->id) return a.problem->id < b.problem->id;
    if (a.method != b.method) return to_string(a.method) < to_string(b.method);
    return a.x0_index < b.x0_index;
  });
  std::vector<RunRecord> records(jobs.size());
  std::atomic<std::size_t> next{0};
  const int workers = std::max(1, o.jobs > 0 ? o.jobs : static_cast<int>(std::thread::hardware_concurrency()));
  auto work = [&] {
    for (std::size_t k; (k = next.fetch_add(1)) < jobs.size();) {
      const auto& job = jobs[k];
      records[k] = make_run_record(*job.problem, job.method, job.problem->recommended_x0[job.x0_index],
                                   o.run, std::nullopt, o.timestamps);
    }
  };
  std::vector<std::thread> pool;
  for (int w = 0; w < std::min<int>(workers, static_cast<int>(jobs.size())); ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  logger()->info("bench: {} runs on {} workers", jobs.size(), workers);

  if (o.format == "csv") {
    std::ostringstream s;
    s << "problem,method,x0_index,termination,iterations,final_residual,order,final_ratio,superlinear\n";
    for (std::size_t k = 0; k < jobs.size(); ++k) {
      const auto& r = records[k];
      const double nan = std::numeric_limits<double>::quiet_NaN();
      s << r.problem << ',' << to_string(r.method) << ',' << jobs[k].x0_index << ','
        << to_string(r.trace.termination) << ',' << r.trace.iterations() << ','
        << fmt17(r.trace.residual_norms.empty() ? nan : r.trace.residual_norms.back()) << ','
        << fmt17(r.rate ? r.rate->order : nan) << ',' << fmt17(r.rate ? r.rate->final_ratio : nan)
        << ',' << (r.rate && r.rate->superlinear ? 1 : 0) << '\n';
    }
    emit(o, s.str(), out);
  } else {
    Json j;
    j["schema"] = kBenchSchema;
    j["records"] = Json::array();
    for (std::size_t k = 0; k < jobs.size(); ++k) {
      Json r = to_json(records[k]);
      r["x0_index"] = jobs[k].x0_index;
      j["records"].push_back(std::move(r));
    }
    emit(o, j.dump(2) + "\n", out);
  }
  return kExitConverged;
}

int cmd_list(std::ostream& out) {
  Json a = Json::array();
  for (const auto& p : corpus()) {
    const auto& c = p.map->capabilities();
    a.push_back({{"id", p.id},
                 {"n", p.map->input_dim()},
                 {"m", p.map->output_dim()},
                 {"lipschitz", c.lipschitz},
                 {"directionally_differentiable", c.directionally_differentiable},
                 {"smooth", p.smooth},
                 {"semismooth", p.semismooth},
                 {"known_roots", p.known_roots.size()},
                 {"recommended_x0", p.recommended_x0.size()},
                 {"notes", p.notes}});
  }
  out << a.dump(2) << "\n";
  return kExitConverged;
}

}  // namespace

// ---------------------------------------------------------------------------

Json vector_json(const Vector& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(num(v[i]));
  return a;
}

Vector vector_from_json(const Json& j) {
  if (!j.is_array()) throw InvalidArgument("expected an array, got " + j.dump());
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = num_from(j[i]);
  return v;
}

Json to_json(const DerivativeValueSet& set) {
  Json gens = Json::array();
  for (const auto& g : set.generators()) gens.push_back(vector_json(g));
  Json j = {{"kind", to_string(set.kind())}, {"generators", gens}, {"describe", set.describe()}};
  if (const auto* s = std::get_if<Sampled>(&set.storage())) {
    j["record"] = {{"t_max", num(s->record.t_max)},
                   {"t_min", num(s->record.t_min)},
                   {"levels", s->record.levels},
                   {"directions", s->record.directions},
                   {"cluster_radius", num(s->record.cluster_radius)},
                   {"raw_count", s->record.raw_count}};
  }
  return j;
}

Vector parse_vector(const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b == std::string::npos) throw InvalidArgument("empty component in '" + text + "'");
    const std::string tok = item.substr(b, e - b + 1);
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(tok.c_str(), &end);
    if (end != tok.c_str() + tok.size() || errno == ERANGE || !std::isfinite(v)) {
      throw InvalidArgument("not a finite real: '" + tok + "'");
    }
    values.push_back(v);
  }
  if (values.empty() || text.back() == ',') throw InvalidArgument("malformed vector '" + text + "'");
  return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

RunRecord make_run_record(const ProblemSpec& problem, Method method, const Vector& x0,
                          const RunConfig& config, const std::optional<Vector>& root,
                          bool timestamps) {
  RunRecord rec;
  rec.problem = problem.id;
  rec.method = method;
  rec.x0 = x0;
  rec.config = config;
  if (timestamps) rec.started_at = utc_now();
  SolverConfig sc;
  sc.method = method;
  sc.tol_residual = config.tol;
  sc.tol_step = config.tol_step;
  sc.max_iter = config.max_iter;
  sc.eta = config.eta;
  sc.validate();
  if (root) {
    rec.root = root;
    rec.root_source = "flag";
    rec.trace = run_newton(*problem.map, x0, sc, root);
  } else {
    rec.trace = run_newton(*problem.map, x0, sc);
    if (const Vector* r = nearest_root(problem, rec.trace.final_iterate())) {
      rec.root = *r;
      rec.root_source = "registered";
      rec.trace = run_newton(*problem.map, x0, sc, *r);
    }
  }
  if (rec.root) {
    try {
      rec.rate = rate_diagnostics(rec.trace, *rec.root);
    } catch (const InsufficientData& e) {
      rec.rate_note = e.what();
    }
  } else {
    rec.rate_note = "no root supplied";
  }
  if (timestamps) rec.finished_at = utc_now();
  return rec;
}

Json to_json(const RunRecord& r) {
  Json j;
  j["schema"] = kRunSchema;
  j["problem"] = r.problem;
  j["method"] = to_string(r.method);
  j["x0"] = vector_json(r.x0);
  j["config"] = config_json(r.config);
  j["root"] = r.root ? vector_json(*r.root) : Json(nullptr);
  j["root_source"] = r.root_source;
  j["trace"] = trace_json(r.trace);
  j["rate"] = r.rate ? rate_json(*r.rate) : Json(nullptr);
  j["rate_note"] = r.rate_note;
  j["timestamps"] = {{"started_at", r.started_at ? Json(*r.started_at) : Json(nullptr)},
                     {"finished_at", r.finished_at ? Json(*r.finished_at) : Json(nullptr)}};
  return j;
}

RunRecord run_record_from_json(const Json& j) {
  if (!j.is_object() || j.value("schema", "") != kRunSchema) {
    throw InvalidArgument(std::string("expected schema ") + kRunSchema);
  }
  try {
    RunRecord r;
    r.problem = j.at("problem").get<std::string>();
    r.method = parse_method(j.at("method").get<std::string>());
    r.x0 = vector_from_json(j.at("x0"));
    r.config = config_from(j.at("config"));
    if (!j.at("root").is_null()) r.root = vector_from_json(j.at("root"));
    r.root_source = j.at("root_source").get<std::string>();
    r.trace = trace_from(j.at("trace"));
    if (!j.at("rate").is_null()) r.rate = rate_from(j.at("rate"));
    r.rate_note = j.at("rate_note").get<std::string>();
    const auto& ts = j.at("timestamps");
    if (!ts.at("started_at").is_null()) r.started_at = ts.at("started_at").get<std::string>();
    if (!ts.at("finished_at").is_null()) r.finished_at = ts.at("finished_at").get<std::string>();
    return r;
  } catch (const Json::exception& e) {
    throw InvalidArgument(std::string("malformed run record: ") + e.what());
  }
}

std::string to_csv(const RunRecord& r) {
  std::ostringstream s;
  const auto& t = r.trace;
  const int n = static_cast<int>(r.x0.size());
  s << "k";
  for (int i = 0; i < n; ++i) s << ",x" << i;
  s << ",residual,step,element_id,membership_residual,error,ratio\n";
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t k = 0; k < t.iterates.size(); ++k) {
    s << k;
    for (int i = 0; i < n; ++i) s << ',' << fmt17(t.iterates[k][i]);
    s << ',' << fmt17(k < t.residual_norms.size() ? t.residual_norms[k] : nan);
    s << ',' << fmt17(k < t.step_norms.size() ? t.step_norms[k] : nan);
    s << ',';
    if (k < t.element_ids.size()) s << t.element_ids[k];
    s << ',' << fmt17(k < t.membership_residuals.size() ? t.membership_residuals[k] : nan);
    const bool have_err = k < t.errors.size();
    s << ',' << fmt17(have_err ? t.errors[k] : nan);
    const bool have_ratio = have_err && k > 0 && t.errors[k - 1] > 0.0;
    s << ',' << fmt17(have_ratio ? t.errors[k] / t.errors[k - 1] : nan) << '\n';
  }
  return s.str();
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Generalized Newton solvers and derivative diagnostics for nonsmooth equations",
               "nsnewton"};
  app.set_config("--config", "", "key=value file mirroring the flags; flags win");
  // Vectors in the config file stay comma-separated strings, as on the command line.
  app.get_config_formatter_base()->arrayDelimiter(';');
  app.add_option("--problem", o.problem, "Problem id (see `list`)");
  app.add_option("--method", o.method, "graphical, bsub, clarke or bdiff")->capture_default_str();
  app.add_option("--x0", o.x0, "Starting point, comma-separated");
  app.add_option("--tol", o.run.tol, "Residual tolerance")->capture_default_str();
  app.add_option("--max-iter", o.run.max_iter, "Iteration cap")->capture_default_str();
  app.add_option("--root", o.root, "Reference root for error columns, comma-separated");
  app.add_option("--out", o.out, "Write output here instead of stdout");
  app.add_option("--format", o.format, "json or csv")
      ->check(CLI::IsMember({"json", "csv"}))
      ->capture_default_str();
  app.add_option("--seed", o.run.seed, "Seed for sampled diagnostics")->capture_default_str();
  app.add_flag("--timestamps", o.timestamps, "Add wall-clock timestamps to run records");
  app.require_subcommand(1);

  auto* solve = app.add_subcommand("solve", "Run one Newton solve and emit its run record");
  auto* analyze = app.add_subcommand("analyze", "Derivative and regularity report at a point");
  analyze->add_option("--point", o.point, "Point, comma-separated");
  analyze->add_option("--direction", o.direction, "Direction (default all ones)");
  auto* check = app.add_subcommand("check", "Kantorovich, inclusion, oracle and residual checks");
  check->add_flag("--kantorovich", o.kantorovich, "Semi-local convergence check on a ball");
  check->add_option("--r", o.radius, "Ball radius for --kantorovich");
  check->add_flag("--inclusions", o.inclusions, "Inclusion chain between derivative objects");
  check->add_flag("--oracle", o.oracle, "Closed-form directional derivative vs sampling");
  check->add_flag("--h2", o.h2, "First-order residual along the registered root path");
  check->add_option("--samples", o.samples, "Random cases for --inclusions / --oracle");
  auto* bench = app.add_subcommand("bench", "Solve every recommended start with every method");
  bench->add_option("--jobs", o.jobs, "Worker threads (default: hardware concurrency)");
  bench->add_option("--problems", o.problems, "Comma-separated problem ids");
  bench->add_option("--methods", o.methods, "Comma-separated methods");
  auto* list = app.add_subcommand("list", "List registered problems");
  for (auto* sub : {solve, analyze, check, bench, list}) sub->fallthrough();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitConverged : kExitUsage;
  }
  try {
    if (solve->parsed()) return cmd_solve(o, out);
    if (analyze->parsed()) return cmd_analyze(o, out);
    if (check->parsed()) return cmd_check(o, out);
    if (bench->parsed()) return cmd_bench(o, out);
    return cmd_list(out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitNotConverged;
  }
}

}  // namespace nsnewton::cli
