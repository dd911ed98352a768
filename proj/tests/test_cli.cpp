#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "bcg/analysis.hpp"
#include "bcg/io.hpp"
#include "doctest.h"
#include "test_helpers.hpp"

namespace {

const std::string& work_dir() {
  static const std::string dir = [] {
    char tmpl[] = "/tmp/bcg_cli_XXXXXX";
    const char* d = mkdtemp(tmpl);
    REQUIRE(d != nullptr);
    return std::string(d);
  }();
  return dir;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct RunResult {
  int code = -1;
  std::string out;
  std::string err;
};

RunResult run_cli(const std::string& args) {
  static int counter = 0;
  const std::string base = work_dir() + "/io." + std::to_string(counter++);
  const std::string cmd =
      std::string(BCG_CLI_PATH) + " " + args + " >" + base + ".out 2>" + base + ".err";
  const int raw = std::system(cmd.c_str());
  RunResult r;
  r.code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  r.out = slurp(base + ".out");
  r.err = slurp(base + ".err");
  return r;
}

std::string temp_path(const std::string& name) { return work_dir() + "/" + name; }

}  // namespace

TEST_CASE("solve writes a faithful machine-readable report") {
  const std::string out = temp_path("motivating_report.json");
  const auto run = run_cli("solve " + helpers::instance_path("motivating") +
                           " --tol-gap 1e-12 --out " + out);
  CHECK(run.code == 0);
  CHECK(run.out.find("status: converged certified") != std::string::npos);

  const auto doc = nlohmann::json::parse(slurp(out));
  CHECK(doc.at("kind") == "equilibrium");
  CHECK(doc.at("converged") == true);
  CHECK(doc.at("certified") == true);
  for (const char* key : {"gap", "psi", "tolerances", "population_costs", "strategies",
                          "flows", "loads", "expected_costs", "multipliers", "iterations"})
    CHECK(doc.contains(key));

  // The report round-trips the in-process numbers exactly.
  bcg::SolveOptions options;
  options.eps_gap = 1e-12;
  const auto rep = bcg::solve_bwe(helpers::load("motivating"), options);
  CHECK(doc.at("psi").get<double>() == rep.psi);
  CHECK(doc.at("gap").get<double>() == rep.gap);
  REQUIRE(doc.at("population_costs").size() == 2);
  CHECK(doc.at("population_costs")[0].get<double>() == rep.population_costs[0]);
  CHECK(doc.at("population_costs")[1].get<double>() == rep.population_costs[1]);
  CHECK(doc.at("loads")[0][0].get<double>() == rep.w.w[0]);
}

TEST_CASE("identical invocations produce identical bytes") {
  const std::string a = temp_path("det_a.json");
  const std::string b = temp_path("det_b.json");
  const std::string args = "solve " + helpers::instance_path("benchmark") + " --seed 1 --out ";
  CHECK(run_cli(args + a).code == 0);
  CHECK(run_cli(args + b).code == 0);
  const std::string ta = slurp(a), tb = slurp(b);
  REQUIRE_FALSE(ta.empty());
  CHECK(ta == tb);
}

TEST_CASE("multi-start cross-check is reported and passes") {
  const auto run = run_cli("solve " + helpers::instance_path("correlation_correlated") +
                           " --starts 3 --out " + temp_path("starts.json"));
  CHECK(run.code == 0);
  CHECK(run.out.find("starts: 3") != std::string::npos);
}

TEST_CASE("iteration starvation is visible in the exit code") {
  const auto run = run_cli("solve " + helpers::instance_path("benchmark") +
                           " --tol-gap 1e-13 --max-iter 3 --out " + temp_path("starved.json"));
  CHECK(run.code == 2);
  CHECK(run.out.find("unconverged") != std::string::npos);
}

TEST_CASE("malformed instances fail with a path-citing message") {
  const std::string bad = temp_path("bad_prior.json");
  {
    std::ofstream f(bad);
    f << R"({
      "network": {"edges": ["e1", "e2"], "routes": [["e1"], ["e2"]]},
      "costs": {"e1": {"*": [1, 1]}, "e2": {"*": [1, 1]}},
      "information": {
        "states": ["a", "n"],
        "prior": [0.5, 0.6],
        "accuracy_tables": [{"types": ["u"], "table": [[1.0], [1.0]]}]
      },
      "demand": 1.0,
      "sizes": [1.0]
    })";
  }
  const auto run = run_cli("solve " + bad + " --out " + temp_path("unused.json"));
  CHECK(run.code == 1);
  CHECK(run.err.find("information.prior") != std::string::npos);
  CHECK(run.err.find("sum to one") != std::string::npos);

  const auto missing = run_cli("solve /nonexistent/nope.json");
  CHECK(missing.code == 1);
}

TEST_CASE("usage errors exit with code 1") {
  CHECK(run_cli("").code == 1);  // missing subcommand
  CHECK(run_cli("solve").code == 1);  // missing instance
  const auto bad_grid = run_cli("sweep " + helpers::instance_path("benchmark") +
                                " --pair 0 1 --grid 0.5:0.1:3 --out " + temp_path("g.csv"));
  CHECK(bad_grid.code == 1);
  CHECK(bad_grid.err.find("grid") != std::string::npos);
}

TEST_CASE("thresholds subcommand emits the pair report") {
  const std::string out = temp_path("thresholds.json");
  const auto run = run_cli("thresholds " + helpers::instance_path("motivating") +
                           " --pair 0 1 --tol-gap 1e-13 --tol-load 2e-6 --out " + out);
  CHECK(run.code == 0);
  CHECK(run.out.find("consistent: yes") != std::string::npos);

  const auto doc = nlohmann::json::parse(slurp(out));
  CHECK(doc.at("kind") == "thresholds");
  CHECK(doc.at("lambda_lo").get<double>() == doctest::Approx(4.0 / 15.0).epsilon(1e-4));
  CHECK(doc.at("lambda_hi").get<double>() == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(doc.at("consistent") == true);
  CHECK(doc.contains("pair_loads"));
}

TEST_CASE("sweep emits the fixed CSV schema") {
  const std::string out = temp_path("sweep.csv");
  const auto run = run_cli("sweep " + helpers::instance_path("motivating") +
                           " --pair 0 1 --grid 0.5:0.5:1 --out " + out);
  CHECK(run.code == 0);
  const std::string csv = slurp(out);
  CHECK(csv.rfind("lambda_i,Psi,C_i,C_j,V_ij,regime,load_dev,status\n", 0) == 0);
  // Header plus exactly one row.
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);
  CHECK(csv.find(",L2,") != std::string::npos);
  CHECK(csv.find(",ok\n") != std::string::npos);
}

TEST_CASE("adoption subcommand answers membership queries") {
  const std::string out = temp_path("adoption.json");
  const auto run = run_cli("adoption " + helpers::instance_path("motivating") +
                           " --query 0.5,0.5 --query 0.1,0.9 --tol-gap 1e-12 --out " + out);
  CHECK(run.code == 0);
  CHECK(run.out.find("-> member equilibrium") != std::string::npos);
  CHECK(run.out.find("-> non-member") != std::string::npos);

  const auto doc = nlohmann::json::parse(slurp(out));
  CHECK(doc.at("kind") == "adoption");
  REQUIRE(doc.at("membership").size() == 2);
  CHECK(doc.at("membership")[0].at("member") == true);
  CHECK(doc.at("membership")[1].at("member") == false);
  CHECK(doc.at("ranges").size() == 2);
}

TEST_CASE("social subcommand reports the homogeneity verdict") {
  const std::string out = temp_path("social.csv");
  const auto run = run_cli("social " + helpers::instance_path("homogeneous") +
                           " --pair 0 1 --grid 0.3:0.7:3 --jobs 2 --out " + out);
  CHECK(run.code == 0);
  CHECK(run.out.find("homogeneous: yes") != std::string::npos);
  const std::string csv = slurp(out);
  CHECK(csv.rfind("lambda_i,C_eq,C_opt,C_so,ratio_opt,ratio_so,status\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);

  const auto hetero = run_cli("social " + helpers::instance_path("benchmark") +
                              " --pair 0 1 --grid 0.5:0.5:1 --out " + temp_path("social2.csv"));
  CHECK(hetero.code == 0);
  CHECK(hetero.out.find("homogeneous: no") != std::string::npos);
}
