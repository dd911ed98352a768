#include "bcg/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "bcg/flow_polytope.hpp"
#include "bcg/lp.hpp"

namespace bcg {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_pair(const GameSpec& game, int i, int j) {
  const int I = game.num_populations();
  if (i < 0 || j < 0 || i >= I || j >= I || i == j)
    throw std::invalid_argument("pair analysis: need two distinct population indices");
}

std::vector<int> all_pops(const GameSpec& game) {
  std::vector<int> pops(game.num_populations());
  std::iota(pops.begin(), pops.end(), 0);
  return pops;
}

}  // namespace

const char* regime_name(Regime r) {
  switch (r) {
    case Regime::lambda1: return "L1";
    case Regime::lambda2: return "L2";
    case Regime::lambda3: return "L3";
    default: return "deg";
  }
}

double load_deviation(const GameSpec& game, const EdgeLoad& a, const EdgeLoad& b) {
  const auto live = live_profiles(game);
  const int E = game.num_edges();
  double dev = 0.0;
  for (int t = 0; t < static_cast<int>(live.size()); ++t) {
    if (!live[t]) continue;
    for (int e = 0; e < E; ++e)
      dev = std::max(dev, std::abs(a.w[t * E + e] - b.w[t * E + e]));
  }
  return dev;
}

ThresholdReport compute_thresholds(const GameSpec& game, int i, int j,
                                   const SolveOptions& options, double band) {
  require_pair(game, i, j);
  if (game.sizes[i] <= 0.0 || game.sizes[j] <= 0.0)
    throw std::invalid_argument("thresholds: both paired populations need positive size");

  ThresholdReport rep;
  rep.i = i;
  rep.j = j;
  for (int k = 0; k < game.num_populations(); ++k)
    if (k != i && k != j) rep.rest += game.sizes[k];

  const FlowProgramResult pair = solve_flow_program(game, options, FlowVariant::pair, i, j);
  rep.w_pair = pair.w;
  rep.psi_pair = pair.value;
  rep.tolerances = pair.tolerances;
  rep.band = band > 0.0 ? band : pair.tolerances.load;

  const int R = game.num_routes();
  const double D = game.demand;
  for (int attempt = 0;; ++attempt) {
    FlowLpBuilder builder(game, all_pops(game), false);
    builder.add_balance_and_demand();
    for (int k = 0; k < game.num_populations(); ++k) builder.add_m_epigraph(k);
    for (int k = 0; k < game.num_populations(); ++k)
      if (k != i && k != j) builder.add_impact_bound(k, game.sizes[k]);
    builder.add_pair_budget(i, j, rep.rest);
    builder.add_load_band(pair.w, rep.band);
    FlowLp flp = builder.take();

    auto max_m_sum = [&](int pop) {
      flp.lp.c.setZero();
      for (int r = 0; r < R; ++r) flp.lp.c[flp.m_index(pop, r)] = -1.0;
      const LpSolution sol = solve_lp(flp.lp);
      return sol.status == LpStatus::optimal ? -sol.objective
                                             : std::numeric_limits<double>::quiet_NaN();
    };
    const double mi = max_m_sum(i);
    const double mj = max_m_sum(j);
    if (std::isnan(mi) || std::isnan(mj)) {
      if (attempt >= 3)
        throw std::runtime_error("thresholds: load-banded polytope infeasible at band " +
                                 std::to_string(rep.band));
      rep.band *= 2.0;
      continue;
    }
    rep.lambda_lo = std::clamp((D - mi) / D, 0.0, 1.0 - rep.rest);
    rep.lambda_hi = std::clamp(mj / D - rep.rest, 0.0, 1.0 - rep.rest);
    break;
  }
  return rep;
}

Regime regime_of(double lambda_i, const ThresholdReport& thresholds) {
  const double top = 1.0 - thresholds.rest;
  if (lambda_i <= 0.0 || lambda_i >= top) return Regime::degenerate;
  if (lambda_i < thresholds.lambda_lo) return Regime::lambda1;
  if (lambda_i > thresholds.lambda_hi) return Regime::lambda3;
  return Regime::lambda2;
}

RegimeReport classify_regime(const GameSpec& game, int i, int j, const SolveOptions& options) {
  RegimeReport rep;
  rep.thresholds = compute_thresholds(game, i, j, options);
  rep.regime = regime_of(game.sizes[i], rep.thresholds);

  const EquilibriumReport eq = solve_bwe(game, options);
  rep.relative_value = eq.population_costs[j] - eq.population_costs[i];
  const double D = game.demand;
  const double tol = rep.thresholds.tolerances.load;
  rep.iic_tight_i = game.sizes[i] * D - impact_of_information(game, eq.f, i) <= tol;
  rep.iic_tight_j = game.sizes[j] * D - impact_of_information(game, eq.f, j) <= tol;
  rep.load_dev = load_deviation(game, eq.w, rep.thresholds.w_pair);
  switch (rep.regime) {
    case Regime::lambda1: rep.consistent = rep.iic_tight_i; break;
    case Regime::lambda3: rep.consistent = rep.iic_tight_j; break;
    case Regime::lambda2: rep.consistent = rep.load_dev <= tol; break;
    case Regime::degenerate: rep.consistent = true; break;
  }
  return rep;
}

RelativeValueReport relative_value(const GameSpec& game, int i, int j,
                                   const SolveOptions& options, double kink_lo,
                                   double kink_hi) {
  require_pair(game, i, j);
  const double eps = 1e-4;
  RelativeValueReport rep;
  const EquilibriumReport eq = solve_bwe(game, options);
  rep.value = eq.population_costs[j] - eq.population_costs[i];

  bool skip = game.sizes[j] < eps;
  for (const double kink : {kink_lo, kink_hi})
    if (kink >= 0.0 && std::abs(game.sizes[i] - kink) < 2.0 * eps) skip = true;
  if (skip) return rep;

  GameSpec pert = game;
  pert.sizes[i] += eps;
  pert.sizes[j] -= eps;
  const EquilibriumReport shifted = solve_bwe(pert, options);
  rep.directional = -(shifted.psi - eq.psi) / (eps * game.demand);
  rep.mismatch = std::abs(rep.value - rep.directional);
  rep.checked = true;
  return rep;
}

SweepTable bathtub_sweep(const GameSpec& game, int i, int j, const std::vector<double>& grid,
                         const SolveOptions& options, int jobs) {
  require_pair(game, i, j);
  if (grid.empty()) throw std::invalid_argument("sweep: empty grid");
  for (size_t k = 1; k < grid.size(); ++k)
    if (grid[k] <= grid[k - 1])
      throw std::invalid_argument("sweep: grid must be strictly increasing");
  SweepTable table;
  table.i = i;
  table.j = j;
  table.thresholds = compute_thresholds(game, i, j, options);
  const double top = 1.0 - table.thresholds.rest;
  table.rows.resize(grid.size());

  std::atomic<size_t> next{0};
  auto worker = [&]() {
    for (size_t k = next++; k < grid.size(); k = next++) {
      SweepRow& row = table.rows[k];
      row.lambda_i = grid[k];
      try {
        if (grid[k] <= 0.0 || grid[k] >= top)
          throw std::invalid_argument("size outside the open pair interval");
        GameSpec g = game;
        g.sizes[i] = grid[k];
        g.sizes[j] = top - grid[k];
        const EquilibriumReport eq = solve_bwe(g, options);
        row.psi = eq.psi;
        row.cost_i = eq.population_costs[i];
        row.cost_j = eq.population_costs[j];
        row.value = row.cost_j - row.cost_i;
        row.regime = regime_of(grid[k], table.thresholds);
        row.load_dev = load_deviation(g, eq.w, table.thresholds.w_pair);
        row.ok = eq.converged;
        row.status = eq.converged ? "ok" : "unconverged";
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

  const bool all_ok =
      std::all_of(table.rows.begin(), table.rows.end(), [](const SweepRow& r) { return r.ok; });
  const double slack = 2.0 * table.thresholds.tolerances.gap;
  std::vector<const SweepRow*> down, flat, up;
  for (const SweepRow& row : table.rows) {
    if (row.lambda_i < table.thresholds.lambda_lo) down.push_back(&row);
    else if (row.lambda_i > table.thresholds.lambda_hi) up.push_back(&row);
    else flat.push_back(&row);
  }
  if (!down.empty()) down.pop_back();  // boundary-adjacent rows get slack
  if (!up.empty()) up.erase(up.begin());
  if (!flat.empty()) flat.erase(flat.begin());
  if (!flat.empty()) flat.pop_back();

  table.decreasing_ok = all_ok;
  for (size_t k = 1; k < down.size(); ++k)
    if (down[k]->psi > down[k - 1]->psi + slack) table.decreasing_ok = false;
  table.increasing_ok = all_ok;
  for (size_t k = 1; k < up.size(); ++k)
    if (up[k]->psi < up[k - 1]->psi - slack) table.increasing_ok = false;
  table.flat_ok = all_ok;
  double flat_min = kInf, flat_max = -kInf;
  for (const SweepRow* row : flat) {
    flat_min = std::min(flat_min, row->psi);
    flat_max = std::max(flat_max, row->psi);
  }
  if (!flat.empty() && flat_max - flat_min > slack) table.flat_ok = false;
  table.bathtub_ok = table.decreasing_ok && table.flat_ok && table.increasing_ok;

  table.value_monotone_ok = all_ok;
  for (size_t k = 1; k < table.rows.size(); ++k)
    if (table.rows[k].value > table.rows[k - 1].value + 1e-6) table.value_monotone_ok = false;
  return table;
}

AdoptionReport compute_adoption_set(const GameSpec& game, const SolveOptions& options,
                                    double band) {
  const int I = game.num_populations();
  AdoptionReport rep;
  const FlowProgramResult relaxed =
      solve_flow_program(game, options, FlowVariant::unconstrained);
  rep.w_dag = relaxed.w;
  rep.psi_min = relaxed.value;
  rep.converged = relaxed.converged;
  rep.tolerances = relaxed.tolerances;
  rep.band = band > 0.0 ? band : relaxed.tolerances.load;
  rep.ranges.resize(I);

  for (int attempt = 0;; ++attempt) {
    FlowLpBuilder builder(game, all_pops(game), true);
    builder.add_balance_and_demand();
    for (int k = 0; k < I; ++k) builder.add_m_epigraph(k);
    for (int k = 0; k < I; ++k) builder.add_impact_bound_variable(k);
    builder.add_lambda_simplex();
    builder.add_load_band(relaxed.w, rep.band);
    FlowLp flp = builder.take();

    bool ok = true;
    for (int k = 0; k < I && ok; ++k) {
      for (const double dir : {1.0, -1.0}) {
        flp.lp.c.setZero();
        flp.lp.c[flp.lambda_index(k)] = dir;
        const LpSolution sol = solve_lp(flp.lp);
        if (sol.status != LpStatus::optimal) {
          ok = false;
          break;
        }
        const double v = std::clamp(sol.x[flp.lambda_index(k)], 0.0, 1.0);
        (dir > 0.0 ? rep.ranges[k].lo : rep.ranges[k].hi) = v;
      }
    }
    if (ok) break;
    if (attempt >= 3)
      throw std::runtime_error("adoption set: load-banded polytope infeasible at band " +
                               std::to_string(rep.band));
    rep.band *= 2.0;
  }
  // The band inflates the ranges by O(band/D); stay clear of that slop.
  const double support_tol = std::max(1e-9, 10.0 * rep.band / game.demand);
  for (auto& range : rep.ranges) range.in_support = range.hi > support_tol;
  return rep;
}

bool adoption_membership(const GameSpec& game, const std::vector<double>& lambda,
                         const AdoptionReport& report) {
  const int I = game.num_populations();
  if (static_cast<int>(lambda.size()) != I)
    throw std::invalid_argument("membership: size vector length mismatch");
  double total = 0.0;
  for (const double v : lambda) {
    if (v < -1e-12) throw std::invalid_argument("membership: negative size");
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw std::invalid_argument("membership: sizes must sum to one");

  FlowLpBuilder builder(game, all_pops(game), false);
  builder.add_balance_and_demand();
  for (int k = 0; k < I; ++k) builder.add_m_epigraph(k);
  for (int k = 0; k < I; ++k) builder.add_impact_bound(k, lambda[k]);
  builder.add_load_band(report.w_dag, report.band);
  FlowLp flp = builder.take();
  return feasibility(flp.lp).feasible;
}

AdoptionCheck verify_adoption_equilibrium(const GameSpec& game,
                                          const std::vector<double>& lambda,
                                          const SolveOptions& options) {
  const int I = game.num_populations();
  if (static_cast<int>(lambda.size()) != I)
    throw std::invalid_argument("adoption check: size vector length mismatch");
  double total = 0.0;
  for (const double v : lambda) {
    if (v < 0.0) throw std::invalid_argument("adoption check: negative size");
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw std::invalid_argument("adoption check: sizes must sum to one");

  GameSpec g = game;
  g.sizes = lambda;
  const EquilibriumReport eq = solve_bwe(g, options);
  AdoptionCheck check;
  check.costs = eq.population_costs;
  check.tol = eq.tolerances.cost;
  const double best = *std::min_element(check.costs.begin(), check.costs.end());
  check.equilibrium = true;
  for (int i = 0; i < I; ++i)
    if (lambda[i] > 0.0 && check.costs[i] > best + check.tol) check.equilibrium = false;
  return check;
}

SocialReport inefficiency_report(const GameSpec& game, const SolveOptions& options) {
  SocialReport rep;
  const EquilibriumReport eq = solve_bwe(game, options);
  rep.cost_eq = average_cost(game, eq.f);
  rep.cost_opt = solve_social_optimum(game, options).cost;
  rep.cost_so = solve_full_info_optimum(game, options).cost;
  rep.ratio_opt = rep.cost_eq / rep.cost_opt;
  rep.ratio_so = rep.cost_eq / rep.cost_so;
  const HomogeneousCheck homo = check_homogeneous_condition(game.network, game.costs);
  rep.homogeneous = homo.accepted;
  rep.homogeneous_reason = homo.reason;
  const double tol = 2.0 * eq.tolerances.cost;
  rep.ordered = rep.cost_so <= rep.cost_opt + tol && rep.cost_opt <= rep.cost_eq + tol;
  return rep;
}

}  // namespace bcg
