#include "bcg/game.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace bcg {

void GameSpec::validate(EdgeCosts::Positivity mode) const {
  network.validate();
  costs.validate(mode);
  info.validate();
  if (costs.num_edges() != network.num_edges())
    throw std::invalid_argument("game: cost table edge count differs from network");
  if (costs.num_states() != info.num_states())
    throw std::invalid_argument("game: cost table state count differs from information");
  if (!(demand > 0.0)) throw std::invalid_argument("game: demand must be positive");
  if (static_cast<int>(sizes.size()) != num_populations())
    throw std::invalid_argument("game: one size per population required");
  double sum = 0.0;
  for (double l : sizes) {
    if (l < 0.0) throw std::invalid_argument("game: negative population size");
    sum += l;
  }
  if (std::abs(sum - 1.0) > 1e-12)
    throw std::invalid_argument("game: population sizes must sum to 1");
}

StrategyProfile zero_profile(const GameSpec& game) {
  StrategyProfile q;
  const int R = game.num_routes();
  q.q.resize(game.num_populations());
  for (int i = 0; i < game.num_populations(); ++i)
    q.q[i].assign(static_cast<size_t>(game.info.tspace.sizes[i]) * R, 0.0);
  return q;
}

StrategyProfile uniform_profile(const GameSpec& game) {
  StrategyProfile q = zero_profile(game);
  const int R = game.num_routes();
  for (int i = 0; i < game.num_populations(); ++i) {
    const double v = game.sizes[i] * game.demand / R;
    for (double& x : q.q[i]) x = v;
  }
  return q;
}

RouteFlow flow_of(const GameSpec& game, const StrategyProfile& q) {
  const int R = game.num_routes();
  const int NT = game.info.tspace.count();
  RouteFlow f;
  f.f.assign(static_cast<size_t>(NT) * R, 0.0);
  for (int t = 0; t < NT; ++t) {
    for (int i = 0; i < game.num_populations(); ++i) {
      const int ti = game.info.tspace.component(t, i);
      for (int r = 0; r < R; ++r) f.f[t * R + r] += q.q[i][ti * R + r];
    }
  }
  return f;
}

EdgeLoad load_of(const GameSpec& game, const RouteFlow& f) {
  const int R = game.num_routes();
  const int E = game.num_edges();
  const int NT = game.info.tspace.count();
  EdgeLoad w;
  w.w.assign(static_cast<size_t>(NT) * E, 0.0);
  for (int t = 0; t < NT; ++t)
    for (int r = 0; r < R; ++r) {
      const double fr = f.f[t * R + r];
      for (int e : game.network.routes[r]) w.w[t * E + e] += fr;
    }
  return w;
}

namespace {

// route_cost[s][t * R + r] = sum_{e in r} c_e^s(w_e(t)).
std::vector<std::vector<double>> route_costs_by_state(const GameSpec& game, const EdgeLoad& w) {
  const int S = game.num_states();
  const int E = game.num_edges();
  const int R = game.num_routes();
  const int NT = game.info.tspace.count();
  std::vector<std::vector<double>> rc(S, std::vector<double>(static_cast<size_t>(NT) * R, 0.0));
  std::vector<double> edge_cost(E);
  for (int s = 0; s < S; ++s) {
    for (int t = 0; t < NT; ++t) {
      for (int e = 0; e < E; ++e) edge_cost[e] = game.costs.at(e, s).eval(w.w[t * E + e]);
      for (int r = 0; r < R; ++r) {
        double sum = 0.0;
        for (int e : game.network.routes[r]) sum += edge_cost[e];
        rc[s][t * R + r] = sum;
      }
    }
  }
  return rc;
}

}  // namespace

std::vector<std::vector<double>> expected_costs(const GameSpec& game, const EdgeLoad& w) {
  const auto rc = route_costs_by_state(game, w);
  const int S = game.num_states();
  const int R = game.num_routes();
  const int I = game.num_populations();
  std::vector<std::vector<double>> out(I);
  for (int i = 0; i < I; ++i) {
    const int Ti = game.info.tspace.sizes[i];
    const int others = game.info.tspace.count_excluding(i);
    out[i].assign(static_cast<size_t>(Ti) * R, 0.0);
    for (int ti = 0; ti < Ti; ++ti) {
      double pr = 0.0;
      for (int s = 0; s < S; ++s) {
        for (int o = 0; o < others; ++o) {
          const int t = game.info.tspace.compose(i, ti, o);
          const double p = game.info.prob(s, t);
          if (p == 0.0) continue;
          pr += p;
          for (int r = 0; r < R; ++r) out[i][ti * R + r] += p * rc[s][t * R + r];
        }
      }
      for (int r = 0; r < R; ++r) out[i][ti * R + r] /= pr;
    }
  }
  return out;
}

double expected_route_cost(const GameSpec& game, const RouteFlow& f, int i, int ti, int r) {
  const EdgeLoad w = load_of(game, f);
  return expected_costs(game, w)[i][ti * game.num_routes() + r];
}

std::vector<double> flow_gradient(const GameSpec& game, const EdgeLoad& w) {
  const auto rc = route_costs_by_state(game, w);
  const int S = game.num_states();
  const int R = game.num_routes();
  const int NT = game.info.tspace.count();
  std::vector<double> g(static_cast<size_t>(NT) * R, 0.0);
  for (int s = 0; s < S; ++s)
    for (int t = 0; t < NT; ++t) {
      const double p = game.info.prob(s, t);
      if (p == 0.0) continue;
      for (int r = 0; r < R; ++r) g[t * R + r] += p * rc[s][t * R + r];
    }
  return g;
}

double potential(const GameSpec& game, const EdgeLoad& w) {
  const int S = game.num_states();
  const int E = game.num_edges();
  const int NT = game.info.tspace.count();
  double phi = 0.0;
  for (int s = 0; s < S; ++s)
    for (int t = 0; t < NT; ++t) {
      const double p = game.info.prob(s, t);
      if (p == 0.0) continue;
      for (int e = 0; e < E; ++e) phi += p * game.costs.at(e, s).integral(w.w[t * E + e]);
    }
  return phi;
}

double potential(const GameSpec& game, const RouteFlow& f) {
  return potential(game, load_of(game, f));
}

double potential(const GameSpec& game, const StrategyProfile& q) {
  return potential(game, load_of(game, flow_of(game, q)));
}

std::vector<std::vector<double>> potential_gradient(const GameSpec& game,
                                                    const StrategyProfile& q) {
  const EdgeLoad w = load_of(game, flow_of(game, q));
  auto grad = expected_costs(game, w);
  const int R = game.num_routes();
  for (int i = 0; i < game.num_populations(); ++i)
    for (int ti = 0; ti < game.info.tspace.sizes[i]; ++ti) {
      const double pr = game.info.type_marginal(i, ti);
      for (int r = 0; r < R; ++r) grad[i][ti * R + r] *= pr;
    }
  return grad;
}

double population_cost(const GameSpec& game, const StrategyProfile& q, int i) {
  const EdgeLoad w = load_of(game, flow_of(game, q));
  if (game.sizes[i] == 0.0) return population_cost_min(game, w, i);
  const auto ec = expected_costs(game, w);
  const int R = game.num_routes();
  double total = 0.0;
  for (int ti = 0; ti < game.info.tspace.sizes[i]; ++ti) {
    const double pr = game.info.type_marginal(i, ti);
    for (int r = 0; r < R; ++r) total += pr * ec[i][ti * R + r] * q.q[i][ti * R + r];
  }
  return total / (game.sizes[i] * game.demand);
}

double population_cost_min(const GameSpec& game, const EdgeLoad& w, int i) {
  const auto ec = expected_costs(game, w);
  const int R = game.num_routes();
  double total = 0.0;
  for (int ti = 0; ti < game.info.tspace.sizes[i]; ++ti) {
    double best = std::numeric_limits<double>::infinity();
    for (int r = 0; r < R; ++r) best = std::min(best, ec[i][ti * R + r]);
    total += game.info.type_marginal(i, ti) * best;
  }
  return total;
}

double average_cost(const GameSpec& game, const RouteFlow& f) {
  const EdgeLoad w = load_of(game, f);
  const int S = game.num_states();
  const int E = game.num_edges();
  const int NT = game.info.tspace.count();
  double total = 0.0;
  for (int s = 0; s < S; ++s)
    for (int t = 0; t < NT; ++t) {
      const double p = game.info.prob(s, t);
      if (p == 0.0) continue;
      for (int e = 0; e < E; ++e) {
        const double we = w.w[t * E + e];
        total += p * we * game.costs.at(e, s).eval(we);
      }
    }
  return total / game.demand;
}

double impact_of_information(const GameSpec& game, const StrategyProfile& q, int i) {
  const int R = game.num_routes();
  const int Ti = game.info.tspace.sizes[i];
  double sum_min = 0.0;
  for (int r = 0; r < R; ++r) {
    double m = std::numeric_limits<double>::infinity();
    for (int ti = 0; ti < Ti; ++ti) m = std::min(m, q.q[i][ti * R + r]);
    sum_min += m;
  }
  return game.sizes[i] * game.demand - sum_min;
}

double impact_of_information(const GameSpec& game, const RouteFlow& f, int i,
                             double* max_ref_dependence) {
  const int R = game.num_routes();
  const int Ti = game.info.tspace.sizes[i];
  const int others = game.info.tspace.count_excluding(i);
  double first = 0.0;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  const int refs = max_ref_dependence ? others : 1;
  for (int o = 0; o < refs; ++o) {
    double sum_min = 0.0;
    for (int r = 0; r < R; ++r) {
      double m = std::numeric_limits<double>::infinity();
      for (int ti = 0; ti < Ti; ++ti)
        m = std::min(m, f.f[game.info.tspace.compose(i, ti, o) * R + r]);
      sum_min += m;
    }
    const double j = game.demand - sum_min;
    if (o == 0) first = j;
    lo = std::min(lo, j);
    hi = std::max(hi, j);
  }
  if (max_ref_dependence) *max_ref_dependence = hi - lo;
  return first;
}

FlowFeasibility check_flow_feasible(const GameSpec& game, const RouteFlow& f, double tol) {
  const int R = game.num_routes();
  const int NT = game.info.tspace.count();
  const auto& ts = game.info.tspace;

  double worst = 0.0;
  std::string family;
  auto consider = [&](const char* name, double violation) {
    if (violation > worst) {
      worst = violation;
      family = name;
    }
  };

  for (int t = 0; t < NT; ++t)
    for (int r = 0; r < R; ++r) consider("nonnegativity", -f.f[t * R + r]);

  for (int t = 0; t < NT; ++t) {
    double sum = 0.0;
    for (int r = 0; r < R; ++r) sum += f.f[t * R + r];
    consider("demand", std::abs(sum - game.demand));
  }

  for (int i = 0; i < game.num_populations(); ++i) {
    const int Ti = ts.sizes[i];
    const int others = ts.count_excluding(i);
    for (int ti = 1; ti < Ti; ++ti)
      for (int o = 1; o < others; ++o)
        for (int r = 0; r < R; ++r) {
          const double v = f.f[ts.compose(i, ti, o) * R + r] - f.f[ts.compose(i, 0, o) * R + r] -
                           f.f[ts.compose(i, ti, 0) * R + r] + f.f[ts.compose(i, 0, 0) * R + r];
          consider("balance", std::abs(v));
        }
  }

  for (int i = 0; i < game.num_populations(); ++i) {
    const double j = impact_of_information(game, f, i, nullptr);
    consider("information-impact", j - game.sizes[i] * game.demand);
  }

  FlowFeasibility out;
  out.max_violation = std::max(worst, 0.0);
  if (worst > tol) {
    out.feasible = false;
    out.violated_family = family;
  }
  return out;
}

Reconstruction reconstruct_strategies(const GameSpec& game, const RouteFlow& f) {
  const auto feas = check_flow_feasible(game, f, 1e-9);
  if (!feas.feasible)
    throw std::invalid_argument("reconstruct_strategies: flow violates " + feas.violated_family +
                                " constraints by " + std::to_string(feas.max_violation));

  const int R = game.num_routes();
  const int I = game.num_populations();
  const auto& ts = game.info.tspace;
  const double D = game.demand;

  // Deviations from the reference profile along each population's own type.
  std::vector<std::vector<double>> M(I, std::vector<double>(R, 0.0));
  std::vector<double> impact(I, 0.0);  // Jhat^i(f) = sum_r M[i][r]
  for (int i = 0; i < I; ++i) {
    for (int r = 0; r < R; ++r) {
      double m = 0.0;
      for (int ti = 0; ti < ts.sizes[i]; ++ti)
        m = std::max(m, f.f[r] - f.f[ts.compose(i, ti, 0) * R + r]);
      M[i][r] = m;
      impact[i] += m;
    }
  }

  double denom = 0.0;
  std::vector<double> num(R, 0.0);
  for (int r = 0; r < R; ++r) {
    double s = f.f[r];
    for (int i = 0; i < I; ++i) s -= M[i][r];
    num[r] = s;  // equals min_t f_r(t), nonnegative for feasible f
    denom += s;
  }

  Reconstruction out;
  out.chi.assign(I, std::vector<double>(R, 0.0));
  for (int i = 0; i < I; ++i) {
    const double slack = game.sizes[i] * D - impact[i];
    for (int r = 0; r < R; ++r) {
      const double gamma = denom > 1e-14 * D ? num[r] / denom : 0.0;
      out.chi[i][r] = gamma * slack + M[i][r];
    }
  }

  out.q = zero_profile(game);
  for (int i = 0; i < I; ++i)
    for (int ti = 0; ti < ts.sizes[i]; ++ti)
      for (int r = 0; r < R; ++r) {
        double v = f.f[ts.compose(i, ti, 0) * R + r] - f.f[r] + out.chi[i][r];
        if (v < 0.0) v = 0.0;  // numerical dust only, f already passed feasibility
        out.q.q[i][ti * R + r] = v;
      }

  out.chi_set.lower = std::move(M);
  out.chi_set.row_sum.resize(I);
  for (int i = 0; i < I; ++i) out.chi_set.row_sum[i] = game.sizes[i] * D;
  out.chi_set.col_sum.assign(f.f.begin(), f.f.begin() + R);
  return out;
}

}  // namespace bcg
