#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "bcg/solver.hpp"
#include "doctest.h"
#include "test_helpers.hpp"

using bcg::FlowVariant;
using bcg::GameSpec;
using bcg::SolveOptions;

namespace {

// On the two-route instance with an informed minority of size l < 4/15 the
// minimizer admits a closed form: the informed mass takes the state-better
// route outright and the uninformed mass splits so that
// q_1 = (2 - 2.4 l) / 3.4 on route 0.
void check_minority_closed_form(const GameSpec& base, double l) {
  GameSpec game = base;
  game.sizes = {l, 1.0 - l};
  const auto rep = bcg::solve_bwe(game, helpers::tight(1e-13));
  REQUIRE(rep.converged);
  const double qu = (2.0 - 2.4 * l) / 3.4;
  CHECK(std::abs(rep.q.at(0, 0, 0, 2)) <= 1e-5);
  CHECK(std::abs(rep.q.at(0, 0, 1, 2) - l) <= 1e-5);
  CHECK(std::abs(rep.q.at(0, 1, 0, 2) - l) <= 1e-5);
  CHECK(std::abs(rep.q.at(0, 1, 1, 2)) <= 1e-5);
  CHECK(std::abs(rep.q.at(1, 0, 0, 2) - qu) <= 1e-5);
  CHECK(std::abs(rep.q.at(1, 0, 1, 2) - (1.0 - l - qu)) <= 1e-5);
}

}  // namespace

TEST_CASE("closed-form equilibrium for a small informed population") {
  const auto base = helpers::load("motivating");
  check_minority_closed_form(base, 0.05);
  check_minority_closed_form(base, 0.1);
  check_minority_closed_form(base, 0.2);

  // Per-population expected costs at l = 0.1.
  GameSpec game = base;
  const auto rep = bcg::solve_bwe(game, helpers::tight(1e-13));
  REQUIRE(rep.certified);
  CHECK(rep.population_costs[0] == doctest::Approx(20.6870588235).epsilon(1e-7));
  CHECK(rep.population_costs[1] == doctest::Approx(20.8047058824).epsilon(1e-7));
}

TEST_CASE("closed-form equilibrium once information stops helping") {
  // Past the lower threshold the loads pin to the state-wise fixed points
  // f_1(a) = 0.4, f_1(n) = 2/3 and both populations pay the same.
  const auto base = helpers::load("motivating");
  for (double l : {0.3, 0.6, 0.9}) {
    GameSpec game = base;
    game.sizes = {l, 1.0 - l};
    const auto rep = bcg::solve_bwe(game, helpers::tight(1e-13));
    REQUIRE(rep.converged);
    CHECK(rep.f.at(0, 0, 2) == doctest::Approx(0.4).epsilon(1e-5));
    CHECK(rep.f.at(1, 0, 2) == doctest::Approx(2.0 / 3.0).epsilon(1e-5));
    CHECK(rep.population_costs[0] == doctest::Approx(rep.population_costs[1]).epsilon(1e-6));
    // 0.2 * 21.2 + 0.8 * (20 + 2/3) = 20.77333...
    CHECK(rep.population_costs[0] == doctest::Approx(20.0 + 0.24 + 0.8 * 2.0 / 3.0).epsilon(1e-5));
  }
}

TEST_CASE("deterministic restarts agree on loads") {
  for (const char* name : {"motivating", "benchmark", "correlation_correlated"}) {
    const auto game = helpers::load(name);
    SolveOptions options = helpers::tight(1e-12);
    const auto rep0 = bcg::solve_bwe(game, options);
    REQUIRE(rep0.converged);
    for (unsigned seed : {1u, 2u}) {
      options.seed = seed;
      const auto rep = bcg::solve_bwe(game, options);
      REQUIRE(rep.converged);
      double dev = 0.0;
      for (size_t k = 0; k < rep.w.w.size(); ++k) {
        // Only live profiles have pinned loads.
        const int t = static_cast<int>(k) / game.num_edges();
        bool live = false;
        for (int s = 0; s < game.num_states(); ++s) live = live || game.info.prob(s, t) > 0.0;
        if (live) dev = std::max(dev, std::abs(rep.w.w[k] - rep0.w.w[k]));
      }
      CHECK(dev <= 1e-5 * game.demand);
    }
    // Same seed twice: bitwise identical outcome.
    options.seed = 1;
    const auto again = bcg::solve_bwe(game, options);
    CHECK(again.psi == bcg::solve_bwe(game, options).psi);
  }
}

TEST_CASE("recorded trace descends monotonically") {
  const auto game = helpers::load("benchmark");
  SolveOptions options;
  options.record_trace = true;
  const auto rep = bcg::solve_bwe(game, options);
  REQUIRE(rep.converged);
  REQUIRE(rep.trace.size() >= 2);
  for (size_t k = 1; k < rep.trace.size(); ++k)
    CHECK(rep.trace[k] <= rep.trace[k - 1] + 1e-12 * (1.0 + std::abs(rep.trace[0])));
  CHECK(rep.trace.back() == doctest::Approx(rep.psi).epsilon(1e-9));
}

TEST_CASE("certification holds on random instances") {
  std::mt19937 rng(606);
  for (int trial = 0; trial < 8; ++trial) {
    const GameSpec game = helpers::random_affine(rng);
    const auto rep = bcg::solve_bwe(game, helpers::tight(1e-11));
    REQUIRE(rep.converged);
    CHECK(rep.certified);
    // Any route carrying mass is within eps_cost of that type's best.
    const int R = game.num_routes();
    for (int i = 0; i < game.num_populations(); ++i)
      for (int ti = 0; ti < game.info.tspace.sizes[i]; ++ti) {
        double best = rep.expected_cost[i][ti * R];
        for (int r = 1; r < R; ++r) best = std::min(best, rep.expected_cost[i][ti * R + r]);
        for (int r = 0; r < R; ++r)
          if (rep.q.at(i, ti, r, R) > 1e-7)
            CHECK(rep.expected_cost[i][ti * R + r] <= best + rep.tolerances.cost);
      }
    // Multipliers reproduce the gradient decomposition.
    for (int i = 0; i < game.num_populations(); ++i)
      for (int ti = 0; ti < game.info.tspace.sizes[i]; ++ti) {
        const double pr = game.info.type_marginal(i, ti);
        for (int r = 0; r < R; ++r) {
          const double grad = pr * rep.expected_cost[i][ti * R + r];
          const double recon = rep.multipliers.mu[i][ti] + rep.multipliers.nu[i][ti * R + r];
          CHECK(grad == doctest::Approx(recon).epsilon(1e-9));
          CHECK(rep.multipliers.nu[i][ti * R + r] >= -1e-12);
        }
      }
  }
}

TEST_CASE("flow program values nest with the constraint sets") {
  const auto game = helpers::load("benchmark");
  const SolveOptions options = helpers::tight(1e-11);
  const auto full = bcg::solve_flow_program(game, options, FlowVariant::full);
  const auto pair = bcg::solve_flow_program(game, options, FlowVariant::pair, 0, 1);
  const auto unc = bcg::solve_flow_program(game, options, FlowVariant::unconstrained);
  REQUIRE(full.converged);
  REQUIRE(pair.converged);
  REQUIRE(unc.converged);
  const double slack = 1e-6 * (1.0 + std::abs(full.value));
  CHECK(unc.value <= pair.value + slack);
  CHECK(pair.value <= full.value + slack);

  // The fully constrained flow program is the equilibrium problem.
  const auto rep = bcg::solve_bwe(game, options);
  CHECK(full.value == doctest::Approx(rep.psi).epsilon(1e-7));
  for (size_t k = 0; k < full.w.w.size(); ++k)
    CHECK(std::abs(full.w.w[k] - rep.w.w[k]) <= 2e-5 * game.demand);
}

TEST_CASE("pair variant validates its population arguments") {
  const auto game = helpers::load("benchmark");
  const SolveOptions options;
  CHECK_THROWS_AS(bcg::solve_flow_program(game, options, FlowVariant::pair, 0, 0),
                  std::invalid_argument);
  CHECK_THROWS_AS(bcg::solve_flow_program(game, options, FlowVariant::pair, -1, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(bcg::solve_flow_program(game, options, FlowVariant::pair, 0, 2),
                  std::invalid_argument);
  CHECK_NOTHROW(bcg::solve_flow_program(game, options, FlowVariant::full, 5, 5));
}

TEST_CASE("social optimum of the zero-latency pair") {
  // One route costs w, the other is constant 1: optimum splits half the
  // demand onto the congestible route for average cost 3/4.
  const auto game = helpers::load("pigou");
  const auto social = bcg::solve_social_optimum(game, helpers::tight(1e-12));
  REQUIRE(social.modified.converged);
  CHECK(social.cost == doctest::Approx(0.75).epsilon(1e-6));

  // The selfish equilibrium piles everyone onto the congestible route.
  const auto eq = bcg::solve_bwe(game, helpers::tight(1e-12));
  CHECK(eq.psi == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(bcg::average_cost(game, eq.f) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("full-information planner averages per-state optima") {
  const auto game = helpers::load("motivating");
  const auto full = bcg::solve_full_info_optimum(game, helpers::tight(1e-12));
  REQUIRE(full.converged);
  REQUIRE(full.state_total_cost.size() == 2);
  // State a: min 20w_1 + 3w_1^2 + 20w_2 + 2w_2^2 at w_1 = 0.4: 21.2.
  CHECK(full.state_total_cost[0] == doctest::Approx(21.2).epsilon(1e-6));
  // State n: slopes (1, 2), optimum at w_1 = 2/3: 20 + 2/3.
  CHECK(full.state_total_cost[1] == doctest::Approx(20.0 + 2.0 / 3.0).epsilon(1e-6));
  CHECK(full.cost == doctest::Approx(0.2 * full.state_total_cost[0] +
                                     0.8 * full.state_total_cost[1])
                         .epsilon(1e-9));
  // Lies below the anarchic average cost.
  const auto eq = bcg::solve_bwe(game, helpers::tight(1e-12));
  CHECK(full.cost <= bcg::average_cost(game, eq.f) + 1e-9);
}

TEST_CASE("kkt certificate accepts solutions and rejects perturbations") {
  const auto game = helpers::load("benchmark");
  const auto rep = bcg::solve_bwe(game, helpers::tight(1e-12));
  REQUIRE(rep.converged);
  const auto good = bcg::certify_kkt(game, rep.q);
  CHECK(good.worst() <= 1e-6);

  // Exact closed-form point on the two-route instance at l = 0.1.
  {
    const auto m = helpers::load("motivating");
    auto q = bcg::zero_profile(m);
    const double qu = (2.0 - 2.4 * 0.1) / 3.4;
    q.at(0, 0, 1, 2) = 0.1;
    q.at(0, 1, 0, 2) = 0.1;
    q.at(1, 0, 0, 2) = qu;
    q.at(1, 0, 1, 2) = 0.9 - qu;
    const auto exact = bcg::certify_kkt(m, q);
    CHECK(exact.worst() <= 1e-12);
    CHECK(exact.primal_feasibility.max_violation <= 1e-14);
    CHECK(exact.dual_feasibility.max_violation <= 1e-14);
  }

  // Moving half of one block's largest route mass must register.
  auto bad = rep.q;
  const int R = game.num_routes();
  int rmax = 0;
  for (int r = 1; r < R; ++r)
    if (bad.q[0][r] > bad.q[0][rmax]) rmax = r;
  const int other = rmax == 0 ? 1 : 0;
  const double moved = 0.5 * bad.q[0][rmax];
  bad.q[0][rmax] -= moved;
  bad.q[0][other] += moved;
  const auto report = bcg::certify_kkt(game, bad);
  CHECK(report.worst() >= 1e-2);
  // Feasibility is preserved by the shift, so the failure is elsewhere.
  CHECK(report.primal_feasibility.max_violation <= 1e-9);
}

TEST_CASE("tolerance resolution follows the documented defaults") {
  const auto game = helpers::load("benchmark");
  SolveOptions options;
  options.max_iterations = 50;
  const auto rep = bcg::solve_bwe(game, options);
  CHECK(rep.tolerances.gap == doctest::Approx(1e-7 * (1.0 + std::abs(rep.tolerances.phi0))));
  CHECK(rep.tolerances.load == doctest::Approx(1e-4 * game.demand));
  CHECK(rep.tolerances.cost ==
        doctest::Approx(1e-5 * std::abs(rep.tolerances.phi0) / game.demand));

  SolveOptions explicit_tols;
  explicit_tols.eps_gap = 1e-3;
  explicit_tols.eps_load = 1e-2;
  explicit_tols.eps_cost = 1e-1;
  const auto rep2 = bcg::solve_bwe(game, explicit_tols);
  CHECK(rep2.tolerances.gap == doctest::Approx(1e-3));
  CHECK(rep2.tolerances.load == doctest::Approx(1e-2));
  CHECK(rep2.tolerances.cost == doctest::Approx(1e-1));
}

TEST_CASE("iteration cap reports non-convergence instead of lying") {
  const auto game = helpers::load("benchmark");
  SolveOptions options = helpers::tight(1e-13);
  options.max_iterations = 3;
  const auto rep = bcg::solve_bwe(game, options);
  CHECK_FALSE(rep.converged);
  CHECK_FALSE(rep.certified);
  CHECK(rep.iterations <= 3);
}
