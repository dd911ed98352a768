#pragma once

#include <string>
#include <vector>

#include "bcg/information.hpp"
#include "bcg/model.hpp"

namespace bcg {

struct GameSpec {
  Network network;
  EdgeCosts costs;
  InformationStructure info;
  double demand = 1.0;
  std::vector<double> sizes;  // lambda, one entry per population

  int num_populations() const { return info.num_populations(); }
  int num_routes() const { return network.num_routes(); }
  int num_edges() const { return network.num_edges(); }
  int num_states() const { return info.num_states(); }
  void validate(EdgeCosts::Positivity mode = EdgeCosts::Positivity::strict) const;
};

// q[i][ti * R + r], population i's flow on route r given its type ti.
struct StrategyProfile {
  std::vector<std::vector<double>> q;

  double& at(int i, int ti, int r, int num_routes) { return q[i][ti * num_routes + r]; }
  double at(int i, int ti, int r, int num_routes) const { return q[i][ti * num_routes + r]; }
};

StrategyProfile zero_profile(const GameSpec& game);
StrategyProfile uniform_profile(const GameSpec& game);

// f[t * R + r], aggregate route flow per joint type profile.
struct RouteFlow {
  std::vector<double> f;
  double& at(int t, int r, int num_routes) { return f[t * num_routes + r]; }
  double at(int t, int r, int num_routes) const { return f[t * num_routes + r]; }
};

// w[t * E + e], aggregate edge load per joint type profile.
struct EdgeLoad {
  std::vector<double> w;
  double& at(int t, int e, int num_edges) { return w[t * num_edges + e]; }
  double at(int t, int e, int num_edges) const { return w[t * num_edges + e]; }
};

RouteFlow flow_of(const GameSpec& game, const StrategyProfile& q);
EdgeLoad load_of(const GameSpec& game, const RouteFlow& f);

// Expected route costs E[c_r | t^i] at the loads induced by f;
// result[i][ti * R + r]. The gradient of the potential is
// Pr(t^i) * result[i][ti * R + r].
std::vector<std::vector<double>> expected_costs(const GameSpec& game, const EdgeLoad& w);
double expected_route_cost(const GameSpec& game, const RouteFlow& f, int i, int ti, int r);

double potential(const GameSpec& game, const EdgeLoad& w);
double potential(const GameSpec& game, const RouteFlow& f);
double potential(const GameSpec& game, const StrategyProfile& q);

// grad[i][ti * R + r] = Pr(t^i) * E[c_r | t^i].
std::vector<std::vector<double>> potential_gradient(const GameSpec& game,
                                                    const StrategyProfile& q);

// Gradient of the potential in flow coordinates:
// grad[t * R + r] = sum_s pi(s,t) * sum_{e in r} c_e^s(w_e(t)).
std::vector<double> flow_gradient(const GameSpec& game, const EdgeLoad& w);

// Demand-weighted population cost; falls back to the per-traveler min-form
// when the population has zero size.
double population_cost(const GameSpec& game, const StrategyProfile& q, int i);
// sum_{t^i} Pr(t^i) min_r E[c_r | t^i]; exact only at equilibrium.
double population_cost_min(const GameSpec& game, const EdgeLoad& w, int i);
double average_cost(const GameSpec& game, const RouteFlow& f);

// J^i(q) = lambda^i D - sum_r min_{t^i} q^i_r(t^i).
double impact_of_information(const GameSpec& game, const StrategyProfile& q, int i);
// Jhat^i(f) = D - sum_r min_{t^i} f_r(t^i, ref^-i); independent of the
// reference profile for feasible f. When max_ref_dependence is given it
// receives the spread across references (> 1e-9 flags an infeasible f).
double impact_of_information(const GameSpec& game, const RouteFlow& f, int i,
                             double* max_ref_dependence = nullptr);

struct FlowFeasibility {
  bool feasible = true;
  std::string violated_family;  // "balance", "demand", "nonnegativity", "information-impact"
  double max_violation = 0.0;
};
FlowFeasibility check_flow_feasible(const GameSpec& game, const RouteFlow& f, double tol = 1e-9);

// The set of strategy profiles inducing a given feasible flow, described by
// the correction variables chi[i][r]:
//   sum_r chi[i][r] = row_sum[i] (= lambda^i D),
//   sum_i chi[i][r] = col_sum[r] (= f_r at the reference profile),
//   chi[i][r] >= lower[i][r].
struct ChiPolytope {
  std::vector<std::vector<double>> lower;
  std::vector<double> row_sum;
  std::vector<double> col_sum;
};

struct Reconstruction {
  StrategyProfile q;  // one concrete member, from the explicit chi formula
  std::vector<std::vector<double>> chi;
  ChiPolytope chi_set;
};

// Requires f in the feasible flow polytope; throws std::invalid_argument
// naming the violated constraint family otherwise.
Reconstruction reconstruct_strategies(const GameSpec& game, const RouteFlow& f);

}  // namespace bcg
