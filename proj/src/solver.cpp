#include "bcg/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

#include "bcg/flow_polytope.hpp"
#include "bcg/lp.hpp"

namespace bcg {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Deterministic platform-independent value in [0, 1).
double unit_hash(uint64_t a, uint64_t b, uint64_t c) {
  const uint64_t h = splitmix64(splitmix64(splitmix64(a) ^ b) ^ c);
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

struct WeightedTerm {
  int state = 0;
  int profile = 0;
  double p = 0.0;
};

std::vector<WeightedTerm> live_terms(const GameSpec& game) {
  std::vector<WeightedTerm> terms;
  const int NT = game.info.tspace.count();
  for (int s = 0; s < game.num_states(); ++s)
    for (int t = 0; t < NT; ++t) {
      const double p = game.info.prob(s, t);
      if (p > 0.0) terms.push_back({s, t, p});
    }
  return terms;
}

bool all_costs_affine(const GameSpec& game) {
  for (int e = 0; e < game.num_edges(); ++e)
    for (int s = 0; s < game.num_states(); ++s)
      if (game.costs.at(e, s).degree() > 1) return false;
  return true;
}

// Exact minimization of the potential along loads w + gamma * dw over
// [0, hi]. The slope is a polynomial in gamma: closed form when every cost
// is affine, bisection on the slope otherwise.
class LineSearch {
 public:
  LineSearch(const GameSpec& game, const std::vector<WeightedTerm>& terms, bool affine)
      : game_(game), terms_(terms), affine_(affine) {}

  double minimize(const std::vector<double>& w, const std::vector<double>& dw, double hi) const {
    const double s0 = slope(w, dw, 0.0);
    if (s0 >= 0.0) return 0.0;
    if (affine_) {
      const int E = game_.num_edges();
      double curv = 0.0;
      for (const auto& wt : terms_)
        for (int e = 0; e < E; ++e) {
          const auto& coef = game_.costs.at(e, wt.state).coef;
          if (coef.size() > 1) {
            const double d = dw[wt.profile * E + e];
            curv += wt.p * coef[1] * d * d;
          }
        }
      if (curv <= 0.0) return hi;
      return std::min(hi, -s0 / curv);
    }
    if (slope(w, dw, hi) <= 0.0) return hi;
    double lo = 0.0, up = hi;
    for (int k = 0; k < 200 && up - lo > 1e-16 * (1.0 + up); ++k) {
      const double mid = 0.5 * (lo + up);
      (slope(w, dw, mid) < 0.0 ? lo : up) = mid;
    }
    return 0.5 * (lo + up);
  }

 private:
  double slope(const std::vector<double>& w, const std::vector<double>& dw, double gamma) const {
    const int E = game_.num_edges();
    double out = 0.0;
    for (const auto& wt : terms_)
      for (int e = 0; e < E; ++e) {
        const double d = dw[wt.profile * E + e];
        if (d == 0.0) continue;
        out += wt.p * game_.costs.at(e, wt.state).eval(w[wt.profile * E + e] + gamma * d) * d;
      }
    return out;
  }

  const GameSpec& game_;
  const std::vector<WeightedTerm>& terms_;
  bool affine_;
};

Tolerances resolve_tolerances(const SolveOptions& options, double phi0, double demand) {
  Tolerances tol;
  tol.phi0 = phi0;
  tol.gap = options.eps_gap > 0.0 ? options.eps_gap : options.gap_scale * (1.0 + std::abs(phi0));
  tol.load = options.eps_load > 0.0 ? options.eps_load : 1e-4 * demand;
  tol.cost = options.eps_cost > 0.0 ? options.eps_cost : 1e-5 * std::abs(phi0) / demand;
  return tol;
}

StrategyProfile start_profile(const GameSpec& game, unsigned seed) {
  StrategyProfile q = zero_profile(game);
  const int R = game.num_routes();
  for (int i = 0; i < game.num_populations(); ++i) {
    const double budget = game.sizes[i] * game.demand;
    if (budget == 0.0) continue;
    for (int ti = 0; ti < game.info.tspace.sizes[i]; ++ti) {
      if (seed == 0) {
        for (int r = 0; r < R; ++r) q.q[i][ti * R + r] = budget / R;
        continue;
      }
      std::vector<double> wgt(R);
      double total = 0.0;
      for (int r = 0; r < R; ++r) {
        wgt[r] = 1.0 + unit_hash(seed, (static_cast<uint64_t>(i) << 32) | static_cast<uint64_t>(ti),
                                 static_cast<uint64_t>(r));
        total += wgt[r];
      }
      for (int r = 0; r < R; ++r) q.q[i][ti * R + r] = budget * wgt[r] / total;
    }
  }
  return q;
}

// Clears numerical dust and restores the exact per-block budget.
void snap_blocks(const GameSpec& game, StrategyProfile& q) {
  const int R = game.num_routes();
  for (int i = 0; i < game.num_populations(); ++i) {
    const double budget = game.sizes[i] * game.demand;
    if (budget == 0.0) continue;
    for (int ti = 0; ti < game.info.tspace.sizes[i]; ++ti) {
      double total = 0.0;
      for (int r = 0; r < R; ++r) {
        double& v = q.q[i][ti * R + r];
        if (v < 1e-12 * budget) v = 0.0;
        total += v;
      }
      const double scale = budget / total;
      for (int r = 0; r < R; ++r) q.q[i][ti * R + r] *= scale;
    }
  }
}

MultiplierSet multipliers_from(const GameSpec& game, const std::vector<std::vector<double>>& ec) {
  const int R = game.num_routes();
  MultiplierSet m;
  m.mu.resize(game.num_populations());
  m.nu.resize(game.num_populations());
  for (int i = 0; i < game.num_populations(); ++i) {
    const int Ti = game.info.tspace.sizes[i];
    m.mu[i].assign(Ti, 0.0);
    m.nu[i].assign(static_cast<size_t>(Ti) * R, 0.0);
    for (int ti = 0; ti < Ti; ++ti) {
      const double pr = game.info.type_marginal(i, ti);
      double best = kInf;
      for (int r = 0; r < R; ++r) best = std::min(best, pr * ec[i][ti * R + r]);
      m.mu[i][ti] = best;
      for (int r = 0; r < R; ++r) m.nu[i][ti * R + r] = pr * ec[i][ti * R + r] - best;
    }
  }
  return m;
}

}  // namespace

EquilibriumReport solve_bwe(const GameSpec& game, const SolveOptions& options) {
  const int R = game.num_routes();
  const int E = game.num_edges();
  const int I = game.num_populations();
  const auto terms = live_terms(game);
  const LineSearch search(game, terms, all_costs_affine(game));

  EquilibriumReport rep;
  rep.q = start_profile(game, options.seed);

  std::vector<std::pair<int, int>> blocks;  // (i, ti) with positive budget
  for (int i = 0; i < I; ++i) {
    if (game.sizes[i] == 0.0) continue;
    for (int ti = 0; ti < game.info.tspace.sizes[i]; ++ti) blocks.emplace_back(i, ti);
  }

  StrategyProfile dir = zero_profile(game);
  std::vector<double> dw(static_cast<size_t>(game.info.tspace.count()) * E);
  Tolerances tol;
  double gap = kInf;
  int iter = 0;
  bool converged = false;

  for (; iter < options.max_iterations; ++iter) {
    const RouteFlow f = flow_of(game, rep.q);
    const EdgeLoad w = load_of(game, f);
    const auto ec = expected_costs(game, w);
    if (iter == 0) tol = resolve_tolerances(options, potential(game, w), game.demand);
    if (options.record_trace) rep.trace.push_back(potential(game, w));

    double gap_fw = 0.0, gap_away = 0.0, gamma_max_away = kInf;
    for (auto& col : dir.q) std::fill(col.begin(), col.end(), 0.0);
    for (const auto& [i, ti] : blocks) {
      const double budget = game.sizes[i] * game.demand;
      const double pr = game.info.type_marginal(i, ti);
      int rmin = 0, rmax = -1;
      double qdot = 0.0;
      for (int r = 0; r < R; ++r) {
        const double c = ec[i][ti * R + r];
        const double qv = rep.q.q[i][ti * R + r];
        qdot += qv * c;
        if (c < ec[i][ti * R + rmin]) rmin = r;
        if (qv > 0.0 && (rmax < 0 || c > ec[i][ti * R + rmax])) rmax = r;
      }
      gap_fw += pr * (qdot - budget * ec[i][ti * R + rmin]);
      gap_away += pr * (budget * ec[i][ti * R + rmax] - qdot);
      dir.q[i][ti * R + rmin] = budget;  // overwritten below if the step is an away step
      const double qmax = rep.q.q[i][ti * R + rmax];
      if (budget - qmax > 1e-14 * budget)
        gamma_max_away = std::min(gamma_max_away, qmax / (budget - qmax));
    }
    gap = gap_fw;
    if (gap_fw <= tol.gap) {
      converged = true;
      break;
    }

    const bool away = options.away_steps && gap_away > gap_fw && gamma_max_away < kInf &&
                      gamma_max_away > 0.0;
    double gamma_hi = 1.0;
    if (away) {
      gamma_hi = gamma_max_away;
      for (const auto& [i, ti] : blocks) {
        const double budget = game.sizes[i] * game.demand;
        int rmax = -1;
        for (int r = 0; r < R; ++r) {
          const double qv = rep.q.q[i][ti * R + r];
          if (qv > 0.0 && (rmax < 0 || ec[i][ti * R + r] > ec[i][ti * R + rmax])) rmax = r;
        }
        for (int r = 0; r < R; ++r) {
          const double qv = rep.q.q[i][ti * R + r];
          dir.q[i][ti * R + r] = (r == rmax) ? qv - budget : qv;
        }
      }
    } else {
      for (const auto& [i, ti] : blocks)
        for (int r = 0; r < R; ++r) dir.q[i][ti * R + r] -= rep.q.q[i][ti * R + r];
    }

    const EdgeLoad dload = load_of(game, flow_of(game, dir));
    dw = dload.w;
    const double gamma = search.minimize(w.w, dw, gamma_hi);
    if (gamma <= 0.0) break;  // numerically stalled; report the achieved gap
    for (const auto& [i, ti] : blocks)
      for (int r = 0; r < R; ++r) rep.q.q[i][ti * R + r] += gamma * dir.q[i][ti * R + r];
    snap_blocks(game, rep.q);
  }

  rep.f = flow_of(game, rep.q);
  rep.w = load_of(game, rep.f);
  rep.psi = potential(game, rep.w);
  rep.gap = gap;
  rep.iterations = iter;
  rep.converged = converged;
  rep.expected_cost = expected_costs(game, rep.w);
  rep.multipliers = multipliers_from(game, rep.expected_cost);
  rep.tolerances = tol;

  rep.certified = converged;
  for (const auto& [i, ti] : blocks) {
    double best = kInf;
    for (int r = 0; r < R; ++r) best = std::min(best, rep.expected_cost[i][ti * R + r]);
    for (int r = 0; r < R; ++r)
      if (rep.q.q[i][ti * R + r] > 1e-7 && rep.expected_cost[i][ti * R + r] > best + tol.cost)
        rep.certified = false;
  }

  rep.population_costs.resize(I);
  for (int i = 0; i < I; ++i) rep.population_costs[i] = population_cost(game, rep.q, i);
  return rep;
}

FlowProgramResult solve_flow_program(const GameSpec& game, const SolveOptions& options,
                                     FlowVariant variant, int i, int j) {
  const int R = game.num_routes();
  const int I = game.num_populations();
  const int NT = game.info.tspace.count();
  if (variant == FlowVariant::pair) {
    if (i < 0 || j < 0 || i >= I || j >= I || i == j)
      throw std::invalid_argument("flow program: pair variant needs two distinct populations");
  }

  std::vector<int> m_pops;
  if (variant != FlowVariant::unconstrained)
    for (int k = 0; k < I; ++k) m_pops.push_back(k);
  FlowLpBuilder builder(game, m_pops, false);
  builder.add_balance_and_demand();
  for (int k : m_pops) builder.add_m_epigraph(k);
  if (variant == FlowVariant::full) {
    for (int k = 0; k < I; ++k) builder.add_impact_bound(k, game.sizes[k]);
  } else if (variant == FlowVariant::pair) {
    double rest = 0.0;
    for (int k = 0; k < I; ++k) {
      if (k == i || k == j) continue;
      builder.add_impact_bound(k, game.sizes[k]);
      rest += game.sizes[k];
    }
    builder.add_pair_budget(i, j, rest);
  }
  FlowLp flp = builder.take();
  const int nf = NT * R;

  auto oracle = [&](const std::vector<double>& grad) {
    flp.lp.c.setZero();
    for (int k = 0; k < nf; ++k) flp.lp.c[k] = grad[k];
    const LpSolution sol = solve_lp(flp.lp);
    if (sol.status != LpStatus::optimal)
      throw std::runtime_error("flow program: linear oracle did not reach an optimum");
    return std::vector<double>(sol.x.data(), sol.x.data() + nf);
  };

  const auto terms = live_terms(game);
  const LineSearch search(game, terms, all_costs_affine(game));

  // Atom dictionary for away steps; the start point counts as an atom.
  std::vector<double> x(nf);
  if (options.seed == 0) {
    std::fill(x.begin(), x.end(), game.demand / R);
  } else {
    std::vector<double> g0(nf);
    for (int t = 0; t < NT; ++t)
      for (int r = 0; r < R; ++r)
        g0[t * R + r] = unit_hash(options.seed, 0x9e3779b9u + static_cast<uint64_t>(t),
                                  static_cast<uint64_t>(r));
    x = oracle(g0);
  }
  std::map<std::vector<double>, double> atoms;
  atoms[x] = 1.0;

  FlowProgramResult res;
  Tolerances tol;
  double gap = kInf;
  int iter = 0;
  bool converged = false;
  RouteFlow fx;

  for (; iter < options.max_iterations; ++iter) {
    fx.f = x;
    const EdgeLoad w = load_of(game, fx);
    if (iter == 0) tol = resolve_tolerances(options, potential(game, w), game.demand);
    const auto g = flow_gradient(game, w);

    const std::vector<double> v = oracle(g);
    double gdot_x = 0.0, gdot_v = 0.0;
    for (int k = 0; k < nf; ++k) {
      gdot_x += g[k] * x[k];
      gdot_v += g[k] * v[k];
    }
    gap = gdot_x - gdot_v;
    if (gap <= tol.gap) {
      converged = true;
      break;
    }

    auto away_it = atoms.begin();
    double gdot_a = -kInf;
    for (auto it = atoms.begin(); it != atoms.end(); ++it) {
      double d = 0.0;
      for (int k = 0; k < nf; ++k) d += g[k] * it->first[k];
      if (d > gdot_a) {
        gdot_a = d;
        away_it = it;
      }
    }
    const double gap_away = gdot_a - gdot_x;
    const bool away = options.away_steps && gap_away > gap && away_it->second < 1.0 - 1e-14;

    std::vector<double> dirf(nf);
    double gamma_hi;
    if (away) {
      for (int k = 0; k < nf; ++k) dirf[k] = x[k] - away_it->first[k];
      gamma_hi = away_it->second / (1.0 - away_it->second);
    } else {
      for (int k = 0; k < nf; ++k) dirf[k] = v[k] - x[k];
      gamma_hi = 1.0;
    }
    RouteFlow df;
    df.f = dirf;
    const EdgeLoad dload = load_of(game, df);
    const double gamma = search.minimize(w.w, dload.w, gamma_hi);
    if (gamma <= 0.0) break;

    for (int k = 0; k < nf; ++k) x[k] += gamma * dirf[k];
    if (away) {
      for (auto& [atom, wgt] : atoms) wgt *= 1.0 + gamma;
      away_it->second -= gamma;
    } else {
      for (auto& [atom, wgt] : atoms) wgt *= 1.0 - gamma;
      atoms[v] += gamma;
    }
    for (auto it = atoms.begin(); it != atoms.end();)
      it = it->second <= 1e-14 ? atoms.erase(it) : std::next(it);

    if ((iter + 1) % 100 == 0) {  // resynchronize the iterate with its atoms
      double total = 0.0;
      for (auto& [atom, wgt] : atoms) total += wgt;
      std::fill(x.begin(), x.end(), 0.0);
      for (auto& [atom, wgt] : atoms) {
        wgt /= total;
        for (int k = 0; k < nf; ++k) x[k] += wgt * atom[k];
      }
    }
  }

  res.f.f = x;
  res.w = load_of(game, res.f);
  res.value = potential(game, res.w);
  res.gap = gap;
  res.iterations = iter;
  res.converged = converged;
  res.tolerances = tol;
  return res;
}

SocialOptimumReport solve_social_optimum(const GameSpec& game, const SolveOptions& options) {
  GameSpec modified = game;
  for (auto& per_state : modified.costs.poly)
    for (auto& poly : per_state) poly = poly.marginal_polynomial();
  SocialOptimumReport rep;
  rep.modified = solve_bwe(modified, options);
  rep.cost = average_cost(game, rep.modified.f);
  return rep;
}

FullInfoReport solve_full_info_optimum(const GameSpec& game, const SolveOptions& options) {
  const int S = game.num_states();
  const int E = game.num_edges();
  FullInfoReport rep;
  rep.state_total_cost.assign(S, 0.0);
  rep.state_load.assign(S, std::vector<double>(E, 0.0));
  rep.converged = true;
  for (int s = 0; s < S; ++s) {
    GameSpec one;
    one.network = game.network;
    one.costs.poly.resize(E);
    for (int e = 0; e < E; ++e)
      one.costs.poly[e] = {game.costs.at(e, s).marginal_polynomial()};
    one.info = make_information({game.info.states[s]}, {1.0}, {{"all"}}, {1.0});
    one.demand = game.demand;
    one.sizes = {1.0};
    const EquilibriumReport st = solve_bwe(one, options);
    rep.converged = rep.converged && st.converged;
    double total = 0.0;
    for (int e = 0; e < E; ++e) {
      const double w = st.w.w[e];
      rep.state_load[s][e] = w;
      total += w * game.costs.at(e, s).eval(w);
    }
    rep.state_total_cost[s] = total;
    rep.cost += game.info.prior[s] * total / game.demand;
  }
  return rep;
}

double KktReport::worst() const {
  return std::max({primal_feasibility.max_violation, stationarity.max_violation,
                   complementarity.max_violation, dual_feasibility.max_violation});
}

KktReport certify_kkt(const GameSpec& game, const StrategyProfile& q) {
  const int R = game.num_routes();
  KktReport rep;
  auto acc = [](KktCondition& c, double v) {
    const double a = std::abs(v);
    c.max_violation = std::max(c.max_violation, a);
    c.sum_violation_2 += a * a;
  };

  for (int i = 0; i < game.num_populations(); ++i) {
    const double budget = game.sizes[i] * game.demand;
    for (int ti = 0; ti < game.info.tspace.sizes[i]; ++ti) {
      double total = 0.0;
      for (int r = 0; r < R; ++r) {
        const double qv = q.q[i][ti * R + r];
        total += qv;
        if (qv < 0.0) acc(rep.primal_feasibility, qv);
      }
      acc(rep.primal_feasibility, total - budget);
    }
  }

  const EdgeLoad w = load_of(game, flow_of(game, q));
  const auto ec = expected_costs(game, w);
  rep.multipliers = multipliers_from(game, ec);
  for (int i = 0; i < game.num_populations(); ++i)
    for (int ti = 0; ti < game.info.tspace.sizes[i]; ++ti) {
      const double pr = game.info.type_marginal(i, ti);
      for (int r = 0; r < R; ++r) {
        const double nu = rep.multipliers.nu[i][ti * R + r];
        acc(rep.stationarity, pr * ec[i][ti * R + r] - rep.multipliers.mu[i][ti] - nu);
        acc(rep.complementarity, nu * q.q[i][ti * R + r]);
        if (nu < 0.0) acc(rep.dual_feasibility, nu);
      }
    }
  return rep;
}

}  // namespace bcg
