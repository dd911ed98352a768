#pragma once

#include <vector>

#include "bcg/game.hpp"
#include "bcg/lp.hpp"

namespace bcg {

// LP encoding of the feasible route-flow polytope. Variables: the flow
// f_r(t) for every joint type profile, then optional per-population
// auxiliary blocks m^i_r (epigraph variables standing for
// min_{t^i} f_r(t^i, ref^-i)), then optional population-size variables.
// The exponential type-combination expansion of the information-impact
// constraint is never generated: m^i_r <= f_r(t^i, ref) for every t^i
// together with a lower bound on sum_r m^i_r is an exact reformulation.
struct FlowLp {
  LinearProgram lp;
  int num_routes = 0;
  int num_profiles = 0;
  std::vector<int> m_offset;  // per population; -1 when absent
  int lambda_offset = -1;

  int f_index(int t, int r) const { return t * num_routes + r; }
  int m_index(int i, int r) const { return m_offset[i] + r; }
  int lambda_index(int i) const { return lambda_offset + i; }
};

class FlowLpBuilder {
 public:
  // m_pops: populations that get an auxiliary m block.
  FlowLpBuilder(const GameSpec& game, const std::vector<int>& m_pops, bool with_lambda);

  // f_r(t^i,t^-i) - f_r(ref^i,t^-i) - f_r(t^i,ref^-i) + f_r(ref) = 0 and
  // sum_r f_r(t) = D; always required.
  void add_balance_and_demand();
  // m^i_r <= f_r(t^i, ref^-i) for all (t^i, r).
  void add_m_epigraph(int i);
  // Information impact of population i bounded by a fixed size:
  // sum_r m^i_r >= (1 - lambda_i) * D.
  void add_impact_bound(int i, double lambda_i);
  // Same with the size as an LP variable: sum_r m^i_r + D * lam_i >= D.
  void add_impact_bound_variable(int i);
  // Joint budget for a dropped pair: sum_r m^i_r + sum_r m^j_r >= (1 + rest) * D.
  void add_pair_budget(int i, int j, double rest);
  // |sum_{r ni e} f_r(t) - w_e(t)| <= band on profiles with positive
  // probability under some state; zero-probability profiles stay free.
  void add_load_band(const EdgeLoad& w, double band);
  // sum_i lam_i = 1.
  void add_lambda_simplex();

  void set_objective(const std::vector<std::pair<int, double>>& terms);
  FlowLp take();

 private:
  void add_row(const std::vector<std::pair<int, double>>& terms, double rhs, bool equality);

  const GameSpec& game_;
  FlowLp out_;
  std::vector<std::vector<std::pair<int, double>>> eq_rows_, in_rows_;
  std::vector<double> eq_rhs_, in_rhs_;
};

// Profiles that occur with positive probability under some state.
std::vector<char> live_profiles(const GameSpec& game);

}  // namespace bcg
