#include "cli.hpp"

#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

using namespace nsnewton;
using namespace nsnewton::cli;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run invoke(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

Json json_of(const Run& r) { return Json::parse(r.out); }

}  // namespace

TEST_CASE("solve |x| from 0.5") {
  const auto r = invoke({"solve", "--problem", "abs1d", "--method", "graphical", "--x0", "0.5"});
  CHECK(r.code == 0);
  const auto j = json_of(r);
  CHECK(j["schema"] == "nsnewton.run/1");
  CHECK(j["trace"]["termination"] == "Converged");
  CHECK(j["trace"]["iterations"] == 1);
  const auto b = invoke({"solve", "--problem", "abs1d", "--method", "bsub", "--x0", "0.5", "--tol", "1e-10"});
  CHECK(json_of(b)["trace"]["iterates"] == j["trace"]["iterates"]);
}

TEST_CASE("solve exit codes") {
  CHECK(invoke({"solve", "--problem", "quad1d", "--x0", "2", "--max-iter", "2"}).code == 2);
  CHECK(invoke({"solve", "--problem", "nope", "--x0", "1"}).code == 1);
  CHECK(invoke({"solve", "--problem", "abs1d", "--x0", "x"}).code == 1);
  CHECK(invoke({"solve", "--problem", "abs1d", "--x0", "1,2"}).code == 1);
  CHECK(invoke({"solve", "--problem", "abs1d", "--x0", "1", "--method", "secant"}).code == 1);
  CHECK(invoke({"solve", "--problem", "abs1d", "--x0", "9"}).code == 1);
  CHECK(invoke({"solve", "--problem", "abs1d"}).code == 1);
  CHECK(invoke({"solve", "--problem", "abs1d", "--x0", "1", "--format", "xml"}).code == 1);
  CHECK(invoke({}).code == 1);
  const auto e = invoke({"solve", "--problem", "nope", "--x0", "1"});
  CHECK(e.err.find("nope") != std::string::npos);
  CHECK(e.out.empty());
}

TEST_CASE("staircase run record carries the measured outcome") {
  const auto r = invoke({"solve", "--problem", "staircase", "--method", "graphical", "--x0", "0.6",
                      "--root", "0"});
  const auto j = json_of(r);
  CHECK(j["root_source"] == "flag");
  CHECK(j["trace"]["termination"] == "Diverged");
  CHECK(r.code == 2);
  const auto ok = json_of(invoke({"solve", "--problem", "staircase", "--x0", "0.7", "--root", "0"}));
  CHECK(ok["rate"]["superlinear"] == true);
}

TEST_CASE("run records round-trip") {
  for (const char* id : {"quad2d", "affabs_10", "staircase"}) {
    const auto& p = find_problem(id);
    const Vector x0 = p.recommended_x0.empty() ? p.known_roots.front() : p.recommended_x0.front();
    for (Method m : {Method::Graphical, Method::Clarke}) {
      const auto rec = make_run_record(p, m, x0, RunConfig{}, std::nullopt, true);
      const Json j = to_json(rec);
      const auto back = run_record_from_json(Json::parse(j.dump()));
      CHECK(to_json(back) == j);
      for (std::size_t k = 0; k < rec.trace.iterates.size(); ++k) {
        CHECK((back.trace.iterates[k] - rec.trace.iterates[k]).norm() == 0.0);
      }
      CHECK(back.started_at == rec.started_at);
    }
  }
  Json bad = to_json(make_run_record(find_problem("abs1d"), Method::Graphical, vec({0.5}), {}, std::nullopt));
  bad["schema"] = "nsnewton.run/0";
  CHECK_THROWS_AS(run_record_from_json(bad), InvalidArgument);
}

TEST_CASE("non-finite numbers survive the round trip") {
  const auto rec = make_run_record(find_problem("staircase"), Method::Graphical, vec({0.6}), {},
                                   vec({0.0}));
  CHECK_FALSE(rec.rate);
  const auto back = run_record_from_json(to_json(rec));
  CHECK(back.rate_note == rec.rate_note);
  Vector inf(1);
  inf[0] = -std::numeric_limits<double>::infinity();
  CHECK(vector_json(inf).dump() == "[\"-inf\"]");
  CHECK(vector_from_json(vector_json(inf))[0] == inf[0]);
  CHECK(std::isnan(vector_from_json(Json::parse("[\"nan\"]"))[0]));
}

TEST_CASE("csv has one row per iterate at 17 digits") {
  const auto r = invoke({"solve", "--problem", "quad1d", "--x0", "2", "--format", "csv"});
  std::istringstream in(r.out);
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(in, line)) lines.push_back(line);
  const auto rec = make_run_record(find_problem("quad1d"), Method::Graphical, vec({2.0}), {}, std::nullopt);
  REQUIRE(lines.size() == rec.trace.iterates.size() + 1);
  CHECK(lines[0] == "k,x0,residual,step,element_id,membership_residual,error,ratio");
  CHECK(lines[2].rfind("1,1.25,0.5625,", 0) == 0);
  const double x2 = std::stod(lines[3].substr(2, lines[3].find(',', 2) - 2));
  CHECK(x2 == rec.trace.iterates[2][0]);
}

TEST_CASE("output is deterministic and --out writes a file") {
  const std::vector<std::string> args{"analyze", "--problem", "staircase", "--point", "0.25"};
  CHECK(invoke(args).out == invoke(args).out);
  const std::string path = "cli_out_test.json";
  const auto r = invoke({"solve", "--problem", "abs1d", "--x0", "0.5", "--out", path});
  CHECK(r.out.empty());
  std::ifstream f(path);
  std::stringstream s;
  s << f.rdbuf();
  CHECK(Json::parse(s.str())["problem"] == "abs1d");
  std::remove(path.c_str());
}

TEST_CASE("timestamps only on request") {
  const auto plain = json_of(invoke({"solve", "--problem", "abs1d", "--x0", "0.5"}));
  CHECK(plain["timestamps"]["started_at"].is_null());
  const auto ts = json_of(invoke({"solve", "--problem", "abs1d", "--x0", "0.5", "--timestamps"}));
  CHECK(ts["timestamps"]["started_at"].is_string());
}

TEST_CASE("config file with flags taking precedence") {
  const std::string path = "cli_config_test.ini";
  {
    std::ofstream f(path);
    f << "problem=quad2d\nx0=2,1.5\nmax-iter=2\nmethod=bsub\n";
  }
  const auto a = json_of(invoke({"solve", "--config", path}));
  CHECK(a["problem"] == "quad2d");
  CHECK(a["method"] == "bsub");
  CHECK(a["config"]["max_iter"] == 2);
  const auto b = json_of(invoke({"solve", "--config", path, "--method", "clarke", "--max-iter", "20"}));
  CHECK(b["method"] == "clarke");
  CHECK(b["trace"]["termination"] == "Converged");
  std::remove(path.c_str());
}

TEST_CASE("analyze examples") {
  const auto ab = json_of(invoke({"analyze", "--problem", "abs1d", "--point", "0"}));
  CHECK(ab["bsub"].size() == 2);
  CHECK(ab["clarke_image"]["kind"] == "Segment");
  CHECK(ab["regularity"]["label"] == "NecessaryHolds-but-SufficientFails");
  CHECK(ab["metric_regularity_modulus"]["infinite"] == true);
  const auto xs = json_of(invoke({"analyze", "--problem", "xsin1x", "--point", "0"}));
  CHECK(xs["directional_boundedness"]["bounded"] == true);
  CHECK(xs["directional_differentiability"]["directionally_differentiable"] == false);
  CHECK(xs["bsub"].contains("error"));
  const auto st = json_of(invoke({"analyze", "--problem", "staircase", "--point", "0.25"}));
  CHECK(st["dirderiv"]["kind"] == "Segment");
  CHECK(vector_from_json(st["dirderiv"]["generators"][0])[0] == 0.75);
  CHECK(vector_from_json(st["dirderiv"]["generators"][1])[0] == 1.0);
  CHECK(invoke({"analyze", "--problem", "abs1d"}).code == 1);
}

TEST_CASE("check examples") {
  const auto k = invoke({"check", "--kantorovich", "--problem", "linear2x", "--x0", "1", "--r", "1"});
  CHECK(k.code == 0);
  CHECK(json_of(k)["kantorovich"]["pass"] == true);
  const auto kf = invoke({"check", "--kantorovich", "--problem", "abs1d", "--x0", "0.5", "--r", "1"});
  CHECK(kf.code == 2);
  CHECK(json_of(kf)["kantorovich"]["mu_infinite"] == true);
  const auto inc = invoke({"check", "--inclusions", "--problem", "abs1d", "--samples", "50"});
  CHECK(inc.code == 0);
  CHECK(json_of(inc)["inclusions"]["all_hold"] == true);
  const auto h2 = invoke({"check", "--h2", "--problem", "nonlip2d"});
  CHECK(h2.code == 0);
  CHECK(json_of(h2)["h2"]["slope"].get<double>() > 1.0);
  CHECK(invoke({"check", "--problem", "abs1d"}).code == 1);
  CHECK(invoke({"check", "--kantorovich", "--problem", "abs1d", "--x0", "1"}).code == 1);
}

TEST_CASE("bench merges in a fixed order regardless of workers") {
  const std::vector<std::string> base{"bench", "--problems", "abs1d,quad2d", "--methods", "clarke,graphical"};
  auto one = base, four = base;
  one.insert(one.end(), {"--jobs", "1"});
  four.insert(four.end(), {"--jobs", "4"});
  const auto a = invoke(one), b = invoke(four);
  CHECK(a.out == b.out);
  const auto j = json_of(a);
  CHECK(j["schema"] == "nsnewton.bench/1");
  CHECK(j["records"].size() == 2 * (5 + 3));
  CHECK(j["records"][0]["problem"] == "abs1d");
  CHECK(j["records"][0]["method"] == "clarke");
  CHECK(invoke({"bench", "--problems", "nope"}).code == 1);
}

TEST_CASE("list") {
  const auto r = invoke({"list"});
  CHECK(r.code == 0);
  CHECK(json_of(r).size() == corpus().size());
}

TEST_CASE("vector parsing") {
  CHECK(parse_vector("1, -2.5,3e-1") == vec({1.0, -2.5, 0.3}));
  for (const char* bad : {"", ",", "1,", "1,,2", "nan", "1e999", "2x"}) {
    CHECK_THROWS_AS(parse_vector(bad), InvalidArgument);
  }
}
