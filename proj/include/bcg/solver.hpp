#pragma once

#include <vector>

#include "bcg/game.hpp"

namespace bcg {

struct SolveOptions {
  int max_iterations = 200000;
  // Frank-Wolfe duality-gap target, objective units; 0 selects
  // gap_scale * (1 + |Phi_0|) with Phi_0 the starting potential.
  double eps_gap = 0.0;
  double gap_scale = 1e-7;
  // Load agreement tolerance; 0 selects 1e-4 * D.
  double eps_load = 0.0;
  // Equilibrium cost slack; 0 selects 1e-5 * Phi_0 / D.
  double eps_cost = 0.0;
  bool away_steps = true;
  // Selects among deterministic starting points; 0 is the uniform split.
  unsigned seed = 0;
  bool record_trace = false;
};

struct Tolerances {
  double gap = 0.0;
  double load = 0.0;
  double cost = 0.0;
  double phi0 = 0.0;
};

struct MultiplierSet {
  std::vector<std::vector<double>> mu;  // [i][ti]
  std::vector<std::vector<double>> nu;  // [i][ti * R + r]
};

struct EquilibriumReport {
  StrategyProfile q;
  RouteFlow f;
  EdgeLoad w;
  double psi = 0.0;
  double gap = 0.0;
  int iterations = 0;
  bool converged = false;
  bool certified = false;
  MultiplierSet multipliers;
  std::vector<std::vector<double>> expected_cost;  // [i][ti * R + r]
  std::vector<double> population_costs;
  Tolerances tolerances;
  std::vector<double> trace;  // potential per iteration when recorded
};

// Equilibrium as the minimizer of the potential over the strategy polytope;
// Frank-Wolfe with away steps over the product of per-(i,t^i) simplices,
// lowest-index tie-breaking, exact line search.
EquilibriumReport solve_bwe(const GameSpec& game, const SolveOptions& options = {});

enum class FlowVariant { full, pair, unconstrained };

struct FlowProgramResult {
  RouteFlow f;
  EdgeLoad w;
  double value = 0.0;
  double gap = 0.0;
  int iterations = 0;
  bool converged = false;
  Tolerances tolerances;
};

// Potential minimization in route-flow coordinates. `full` keeps every
// population's information-impact constraint, `pair` drops populations i
// and j and adds their joint budget, `unconstrained` drops all of them.
// The linear oracle is an LP over the flow polytope.
FlowProgramResult solve_flow_program(const GameSpec& game, const SolveOptions& options,
                                     FlowVariant variant, int i = -1, int j = -1);

struct SocialOptimumReport {
  EquilibriumReport modified;  // equilibrium of the marginal-cost game
  double cost = 0.0;           // average cost at the optimum, original costs
};

// Minimum expected average cost over the strategy polytope, computed as the
// equilibrium of the game with marginal edge costs c(w) + w c'(w).
SocialOptimumReport solve_social_optimum(const GameSpec& game, const SolveOptions& options = {});

struct FullInfoReport {
  std::vector<double> state_total_cost;           // per state
  std::vector<std::vector<double>> state_load;    // per state, per edge
  double cost = 0.0;                              // demand-averaged over states
  bool converged = false;
};

// Fully informed planner: per-state deterministic total-cost minimum.
FullInfoReport solve_full_info_optimum(const GameSpec& game, const SolveOptions& options = {});

struct KktCondition {
  double max_violation = 0.0;
  double sum_violation_2 = 0.0;  // squared-violation accumulator
};

struct KktReport {
  KktCondition primal_feasibility;
  KktCondition stationarity;
  KktCondition complementarity;
  KktCondition dual_feasibility;
  MultiplierSet multipliers;
  double worst() const;
};

// Multipliers from the closed forms mu = min_r Pr(t^i) E[c_r|t^i],
// nu_r = Pr(t^i) E[c_r|t^i] - mu, and the violations they leave.
KktReport certify_kkt(const GameSpec& game, const StrategyProfile& q);

}  // namespace bcg
