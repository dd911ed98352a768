#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "bcg/analysis.hpp"
#include "bcg/io.hpp"
#include "bcg/solver.hpp"

namespace {

using namespace bcg;

struct CommonArgs {
  std::string instance;
  std::string out;
  double tol_gap = 0.0;
  double tol_load = 0.0;
  double tol_cost = 0.0;
  int max_iter = 200000;
  unsigned seed = 0;
};

void add_common(CLI::App* cmd, CommonArgs& args, const std::string& default_out) {
  args.out = default_out;
  cmd->add_option("instance", args.instance, "instance file (JSON)")->required();
  cmd->add_option("--out", args.out, "output artifact path");
  cmd->add_option("--tol-gap", args.tol_gap, "duality-gap target (0 = scaled default)");
  cmd->add_option("--tol-load", args.tol_load, "load agreement tolerance (0 = 1e-4*D)");
  cmd->add_option("--tol-cost", args.tol_cost, "equilibrium cost slack (0 = scaled default)");
  cmd->add_option("--max-iter", args.max_iter, "iteration cap per solve");
  cmd->add_option("--seed", args.seed, "deterministic start selector (0 = uniform)");
}

SolveOptions options_of(const CommonArgs& args) {
  SolveOptions options;
  options.eps_gap = args.tol_gap;
  options.eps_load = args.tol_load;
  options.eps_cost = args.tol_cost;
  options.max_iterations = args.max_iter;
  options.seed = args.seed;
  return options;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
}

std::vector<double> parse_grid(const std::string& text) {
  double a = 0.0, b = 0.0;
  int n = 0;
  char tail = 0;
  if (std::sscanf(text.c_str(), "%lf:%lf:%d%c", &a, &b, &n, &tail) != 3 || n < 1 || a > b)
    throw std::invalid_argument("grid: expected a:b:n with a <= b and n >= 1");
  if (n == 1) return {a};
  std::vector<double> grid(n);
  for (int k = 0; k < n; ++k) grid[k] = a + k * (b - a) / (n - 1);
  return grid;
}

std::vector<double> parse_lambda(const std::string& text) {
  std::vector<double> out;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    size_t used = 0;
    out.push_back(std::stod(item, &used));
    if (used != item.size()) throw std::invalid_argument("query: expected comma-separated sizes");
  }
  if (out.empty()) throw std::invalid_argument("query: expected comma-separated sizes");
  return out;
}

int run_solve(const CommonArgs& args, int starts) {
  const GameSpec game = load_instance(args.instance);
  const SolveOptions options = options_of(args);
  const EquilibriumReport report = solve_bwe(game, options);

  double start_dev = 0.0;
  std::vector<EquilibriumReport> extra;
  for (int k = 1; k < starts; ++k) {
    SolveOptions alt = options;
    alt.seed = args.seed + static_cast<unsigned>(k);
    extra.push_back(solve_bwe(game, alt));
    start_dev = std::max(start_dev, load_deviation(game, report.w, extra.back().w));
  }
  const bool starts_agree = start_dev <= report.tolerances.load;

  write_file(args.out, report_json(game, report));
  std::cout << "status: " << (report.converged ? "converged" : "unconverged") << ' '
            << (report.certified ? "certified" : "uncertified") << '\n'
            << "psi: " << format_sig(report.psi) << '\n'
            << "gap: " << format_sig(report.gap) << '\n'
            << "iterations: " << report.iterations << '\n';
  std::cout << "population costs:";
  for (const double c : report.population_costs) std::cout << ' ' << format_sig(c);
  std::cout << '\n';
  if (starts > 1)
    std::cout << "starts: " << starts << " max load deviation " << format_sig(start_dev)
              << " (tol " << format_sig(report.tolerances.load) << ")\n";
  std::cout << "report: " << args.out << '\n';
  return report.certified && starts_agree ? 0 : 2;
}

int run_thresholds(const CommonArgs& args, const std::vector<int>& pair) {
  const GameSpec game = load_instance(args.instance);
  const RegimeReport report = classify_regime(game, pair[0], pair[1], options_of(args));
  write_file(args.out, thresholds_json(game, report));
  std::cout << "pair: " << pair[0] << ' ' << pair[1] << '\n'
            << "lambda_lo: " << format_sig(report.thresholds.lambda_lo) << '\n'
            << "lambda_hi: " << format_sig(report.thresholds.lambda_hi) << '\n'
            << "regime: " << regime_name(report.regime) << '\n'
            << "relative value: " << format_sig(report.relative_value) << '\n'
            << "consistent: " << (report.consistent ? "yes" : "no") << '\n'
            << "report: " << args.out << '\n';
  return report.consistent ? 0 : 2;
}

int run_sweep(const CommonArgs& args, const std::vector<int>& pair, const std::string& grid_text,
              int jobs) {
  const GameSpec game = load_instance(args.instance);
  const std::vector<double> grid = parse_grid(grid_text);
  const SweepTable table = bathtub_sweep(game, pair[0], pair[1], grid, options_of(args), jobs);
  write_file(args.out, sweep_csv(table));
  bool all_ok = true;
  for (const SweepRow& row : table.rows) all_ok = all_ok && row.ok;
  std::cout << "points: " << table.rows.size() << '\n'
            << "lambda_lo: " << format_sig(table.thresholds.lambda_lo) << '\n'
            << "lambda_hi: " << format_sig(table.thresholds.lambda_hi) << '\n'
            << "bathtub: " << (table.bathtub_ok ? "yes" : "no") << '\n'
            << "value monotone: " << (table.value_monotone_ok ? "yes" : "no") << '\n'
            << "table: " << args.out << '\n';
  return all_ok ? 0 : 2;
}

int run_adoption(const CommonArgs& args, const std::vector<std::string>& raw_queries) {
  const GameSpec game = load_instance(args.instance);
  const SolveOptions options = options_of(args);
  const AdoptionReport report = compute_adoption_set(game, options);
  std::vector<MembershipQuery> queries;
  for (const std::string& raw : raw_queries) {
    MembershipQuery query;
    query.lambda = parse_lambda(raw);
    query.member = adoption_membership(game, query.lambda, report);
    query.equilibrium = verify_adoption_equilibrium(game, query.lambda, options).equilibrium;
    queries.push_back(std::move(query));
  }
  write_file(args.out, adoption_json(game, report, queries));
  std::cout << "psi_min: " << format_sig(report.psi_min) << '\n';
  for (size_t i = 0; i < report.ranges.size(); ++i)
    std::cout << "range[" << i << "]: [" << format_sig(report.ranges[i].lo) << ", "
              << format_sig(report.ranges[i].hi) << "]"
              << (report.ranges[i].in_support ? " in-support" : "") << '\n';
  for (const MembershipQuery& query : queries) {
    std::cout << "query:";
    for (const double v : query.lambda) std::cout << ' ' << format_sig(v);
    std::cout << " -> " << (query.member ? "member" : "non-member") << ' '
              << (query.equilibrium ? "equilibrium" : "not-equilibrium") << '\n';
  }
  std::cout << "report: " << args.out << '\n';
  return report.converged ? 0 : 2;
}

int run_social(const CommonArgs& args, const std::vector<int>& pair, const std::string& grid_text,
               int jobs) {
  const GameSpec game = load_instance(args.instance);
  const std::vector<double> grid = parse_grid(grid_text);
  const SolveOptions options = options_of(args);
  const int i = pair[0], j = pair[1];
  const int I = game.num_populations();
  if (i < 0 || j < 0 || i >= I || j >= I || i == j)
    throw std::invalid_argument("pair: need two distinct population indices");
  double rest = 0.0;
  for (int k = 0; k < I; ++k)
    if (k != i && k != j) rest += game.sizes[k];
  const double top = 1.0 - rest;

  std::vector<SocialSweepRow> rows(grid.size());
  std::atomic<size_t> next{0};
  auto worker = [&]() {
    for (size_t k = next++; k < grid.size(); k = next++) {
      SocialSweepRow& row = rows[k];
      row.lambda_i = grid[k];
      try {
        if (grid[k] <= 0.0 || grid[k] >= top)
          throw std::invalid_argument("size outside the open pair interval");
        GameSpec g = game;
        g.sizes[i] = grid[k];
        g.sizes[j] = top - grid[k];
        row.report = inefficiency_report(g, options);
        row.ok = true;
        row.status = "ok";
      } catch (const std::exception& e) {
        row.ok = false;
        row.status = e.what();
      }
    }
  };
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int n = 0; n < jobs; ++n) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  write_file(args.out, social_csv(rows));
  const HomogeneousCheck homo = check_homogeneous_condition(game.network, game.costs);
  bool all_ok = true;
  for (const SocialSweepRow& row : rows) all_ok = all_ok && row.ok;
  std::cout << "points: " << rows.size() << '\n'
            << "homogeneous: " << (homo.accepted ? "yes" : "no");
  if (!homo.accepted) std::cout << " (" << homo.reason << ")";
  std::cout << '\n' << "table: " << args.out << '\n';
  return all_ok ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Solver toolkit for congestion games with heterogeneously informed populations"};
  app.require_subcommand(1);

  CommonArgs solve_args, thr_args, sweep_args, adopt_args, social_args;
  int starts = 1;
  std::vector<int> thr_pair, sweep_pair, social_pair;
  std::string sweep_grid, social_grid;
  int sweep_jobs = 1, social_jobs = 1;
  std::vector<std::string> queries;

  CLI::App* solve = app.add_subcommand("solve", "equilibrium of an instance");
  add_common(solve, solve_args, "report.json");
  solve->add_option("--starts", starts, "number of deterministic starts to cross-check");

  CLI::App* thresholds = app.add_subcommand("thresholds", "pairwise regime thresholds");
  add_common(thresholds, thr_args, "report.json");
  thresholds->add_option("--pair", thr_pair, "population pair i j")->expected(2)->required();

  CLI::App* sweep = app.add_subcommand("sweep", "potential/cost sweep over a size grid");
  add_common(sweep, sweep_args, "sweep.csv");
  sweep->add_option("--pair", sweep_pair, "population pair i j")->expected(2)->required();
  sweep->add_option("--grid", sweep_grid, "size grid a:b:n")->required();
  sweep->add_option("--jobs", sweep_jobs, "parallel solves");

  CLI::App* adoption = app.add_subcommand("adoption", "potential-minimizing size vectors");
  add_common(adoption, adopt_args, "report.json");
  adoption->add_option("--query", queries, "size vector l0,l1,... to test (repeatable)");

  CLI::App* social = app.add_subcommand("social", "equilibrium vs planner cost curves");
  add_common(social, social_args, "sweep.csv");
  social->add_option("--pair", social_pair, "population pair i j")->expected(2)->required();
  social->add_option("--grid", social_grid, "size grid a:b:n")->required();
  social->add_option("--jobs", social_jobs, "parallel solves");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*solve) return run_solve(solve_args, starts);
    if (*thresholds) return run_thresholds(thr_args, thr_pair);
    if (*sweep) return run_sweep(sweep_args, sweep_pair, sweep_grid, sweep_jobs);
    if (*adoption) return run_adoption(adopt_args, queries);
    if (*social) return run_social(social_args, social_pair, social_grid, social_jobs);
  } catch (const bcg::InstanceError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
