#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "bcg/analysis.hpp"
#include "doctest.h"
#include "test_helpers.hpp"

using bcg::GameSpec;
using bcg::Regime;
using bcg::SolveOptions;

namespace {

SolveOptions threshold_options() {
  SolveOptions options;
  options.eps_gap = 1e-13;
  options.eps_load = 2e-6;
  return options;
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> g(n);
  for (int k = 0; k < n; ++k) g[k] = a + (b - a) * k / (n - 1);
  return g;
}

}  // namespace

TEST_CASE("regime names") {
  CHECK(std::string(bcg::regime_name(Regime::lambda1)) == "L1");
  CHECK(std::string(bcg::regime_name(Regime::lambda2)) == "L2");
  CHECK(std::string(bcg::regime_name(Regime::lambda3)) == "L3");
  CHECK(std::string(bcg::regime_name(Regime::degenerate)) == "deg");
}

TEST_CASE("load deviation ignores zero-probability profiles") {
  const auto game = helpers::load("correlation_correlated");
  bcg::EdgeLoad a, b;
  const int E = game.num_edges();
  a.w.assign(game.info.tspace.count() * E, 1.0);
  b.w = a.w;
  // Profiles (a,n) and (n,a) are dead under the correlated prior.
  const int dead = game.info.tspace.index({0, 1});
  bool any_state = false;
  for (int s = 0; s < game.num_states(); ++s)
    any_state = any_state || game.info.prob(s, dead) > 0.0;
  REQUIRE_FALSE(any_state);
  b.w[dead * E] = 99.0;
  CHECK(bcg::load_deviation(game, a, b) == doctest::Approx(0.0));

  const int live = game.info.tspace.index({0, 0});
  b.w[live * E] = 1.5;
  CHECK(bcg::load_deviation(game, a, b) == doctest::Approx(0.5));
}

TEST_CASE("thresholds of the two-route instance") {
  // Closed form: information helps until the informed share reaches 4/15;
  // the upper threshold sits at the boundary 1 - rest = 1.
  const auto game = helpers::load("motivating");
  const auto th = bcg::compute_thresholds(game, 0, 1, threshold_options());
  CHECK(th.lambda_lo == doctest::Approx(4.0 / 15.0).epsilon(1e-5));
  CHECK(th.lambda_hi == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(th.rest == doctest::Approx(0.0));
  CHECK(th.lambda_lo >= 0.0);
  CHECK(th.lambda_hi <= 1.0 + 1e-12);
  CHECK(th.band > 0.0);
}

TEST_CASE("degenerate single-population-of-interest thresholds") {
  // Population 0's signal separates states so strongly that sharing never
  // helps: the whole sweep stays in the first regime.
  const auto game = helpers::load("single_tis");
  const auto th = bcg::compute_thresholds(game, 0, 1, threshold_options());
  CHECK(th.lambda_lo == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(th.lambda_hi == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("threshold ordering with a third population present") {
  const auto game = helpers::load("three_pop");
  const auto th = bcg::compute_thresholds(game, 0, 1, threshold_options());
  const double cap = 1.0 - th.rest;
  CHECK(th.rest == doctest::Approx(0.4));
  CHECK(th.lambda_lo >= -1e-9);
  CHECK(th.lambda_lo <= th.lambda_hi + 1e-9);
  CHECK(th.lambda_hi <= cap + 1e-9);
}

TEST_CASE("regime classification from a size") {
  bcg::ThresholdReport th;
  th.lambda_lo = 0.3;
  th.lambda_hi = 0.7;
  th.rest = 0.1;
  CHECK(bcg::regime_of(0.1, th) == Regime::lambda1);
  CHECK(bcg::regime_of(0.3, th) == Regime::lambda2);  // closed boundary
  CHECK(bcg::regime_of(0.5, th) == Regime::lambda2);
  CHECK(bcg::regime_of(0.7, th) == Regime::lambda2);
  CHECK(bcg::regime_of(0.8, th) == Regime::lambda3);
  CHECK(bcg::regime_of(0.0, th) == Regime::degenerate);
  CHECK(bcg::regime_of(0.9, th) == Regime::degenerate);  // 1 - rest
  CHECK(bcg::regime_of(1.0, th) == Regime::degenerate);
}

TEST_CASE("regime classification is self-consistent on the two-route instance") {
  const auto base = helpers::load("motivating");
  SolveOptions options = threshold_options();

  for (double l : {0.1, 0.5, 0.9}) {
    GameSpec game = base;
    game.sizes = {l, 1.0 - l};
    const auto rep = bcg::classify_regime(game, 0, 1, options);
    CHECK(rep.consistent);
    if (l < 4.0 / 15.0 - 1e-3) {
      CHECK(rep.regime == Regime::lambda1);
      CHECK(rep.iic_tight_i);
    } else {
      CHECK(rep.regime == Regime::lambda2);
      CHECK(rep.load_dev <= rep.thresholds.tolerances.load * 2.0 + 2e-5 * game.demand);
    }
  }
}

TEST_CASE("regime three binds the partner population on the benchmark") {
  const auto base = helpers::load("benchmark");
  GameSpec game = base;
  game.sizes = {0.98, 0.02};
  const auto rep = bcg::classify_regime(game, 0, 1, threshold_options());
  CHECK(rep.regime == Regime::lambda3);
  CHECK(rep.iic_tight_j);
  CHECK(rep.consistent);
}

TEST_CASE("relative value agrees with the potential derivative") {
  const auto base = helpers::load("benchmark");
  SolveOptions options = helpers::tight(1e-12);
  // Interior points away from the two kinks (0.1726, 0.9618).
  for (double l : {0.05, 0.4, 0.8}) {
    GameSpec game = base;
    game.sizes = {l, 1.0 - l};
    const auto rv = bcg::relative_value(game, 0, 1, options, 0.1726, 0.9618);
    REQUIRE(rv.checked);
    CHECK(rv.mismatch <= 1e-2);
    CHECK(rv.value == doctest::Approx(rv.directional).epsilon(0.05).scale(0.01));
  }

  // Inside the flat regime the value of additional information is zero.
  GameSpec game = base;
  game.sizes = {0.5, 0.5};
  const auto rv = bcg::relative_value(game, 0, 1, options, 0.1726, 0.9618);
  CHECK(std::abs(rv.value) <= 1e-4);

  // Next to a kink the derivative check declines to vouch for itself.
  game.sizes = {0.17261, 1.0 - 0.17261};
  const auto skipped = bcg::relative_value(game, 0, 1, options, 0.1726, 0.9618);
  CHECK_FALSE(skipped.checked);
}

TEST_CASE("bathtub sweep over the benchmark grid") {
  const auto game = helpers::load("benchmark");
  SolveOptions options;
  options.eps_gap = 1e-11;
  const auto table = bcg::bathtub_sweep(game, 0, 1, linspace(0.02, 0.98, 25), options, 4);
  REQUIRE(table.rows.size() == 25);
  for (const auto& row : table.rows) {
    CHECK(row.ok);
    CHECK(row.status == "ok");
  }
  CHECK(table.decreasing_ok);
  CHECK(table.flat_ok);
  CHECK(table.increasing_ok);
  CHECK(table.bathtub_ok);
  CHECK(table.value_monotone_ok);

  // Rows are in grid order and the regime labels partition the grid.
  for (size_t k = 1; k < table.rows.size(); ++k) {
    CHECK(table.rows[k].lambda_i > table.rows[k - 1].lambda_i);
    CHECK(static_cast<int>(table.rows[k].regime) >=
          static_cast<int>(table.rows[k - 1].regime));
  }
  // The flat segment sits at the pair-relaxed minimum.
  for (const auto& row : table.rows)
    if (row.regime == Regime::lambda2)
      CHECK(row.psi == doctest::Approx(table.thresholds.psi_pair).epsilon(1e-7));

  // The sign of the relative value flips from positive to negative.
  CHECK(table.rows.front().value > 0.0);
  CHECK(table.rows.back().value < 0.0);
}

TEST_CASE("sweep potential is convex in the size") {
  const auto game = helpers::load("benchmark");
  SolveOptions options;
  options.eps_gap = 1e-11;
  const auto table = bcg::bathtub_sweep(game, 0, 1, linspace(0.05, 0.95, 19), options, 4);
  const double scale = 1.0 + std::abs(table.rows.front().psi);
  for (size_t k = 2; k < table.rows.size(); ++k) {
    const double second = table.rows[k].psi - 2.0 * table.rows[k - 1].psi +
                          table.rows[k - 2].psi;
    CHECK(second >= -1e-6 * scale);
  }
}

TEST_CASE("flat sweep when neither population moves the minimum") {
  // Perfectly aligned types: both populations hold the same signal, so
  // moving mass between them changes nothing and the potential is constant.
  const auto game = helpers::load("correlation_correlated");
  SolveOptions options;
  options.eps_gap = 1e-11;
  const auto table = bcg::bathtub_sweep(game, 0, 1, linspace(0.1, 0.9, 9), options, 2);
  const double scale = 1.0 + std::abs(table.rows.front().psi);
  for (const auto& row : table.rows) {
    CHECK(row.ok);
    CHECK(std::abs(row.psi - table.rows.front().psi) <= 1e-7 * scale);
  }
  CHECK(table.bathtub_ok);
}

TEST_CASE("sweep rejects malformed grids and marks out-of-range rows") {
  const auto game = helpers::load("benchmark");
  CHECK_THROWS_AS(bcg::bathtub_sweep(game, 0, 1, {0.5, 0.4}, SolveOptions{}),
                  std::invalid_argument);
  CHECK_THROWS_AS(bcg::bathtub_sweep(game, 0, 1, {}, SolveOptions{}), std::invalid_argument);
  CHECK_THROWS_AS(bcg::bathtub_sweep(game, 0, 0, {0.5}, SolveOptions{}), std::invalid_argument);

  // A size on the closed boundary is not solvable; its row reports the
  // failure without poisoning the others.
  const auto table = bcg::bathtub_sweep(game, 0, 1, {0.0, 0.5}, SolveOptions{});
  REQUIRE(table.rows.size() == 2);
  CHECK_FALSE(table.rows[0].ok);
  CHECK(table.rows[0].status.find("outside") != std::string::npos);
  CHECK(table.rows[1].ok);
  CHECK_FALSE(table.bathtub_ok);
}

TEST_CASE("adoption set of the two-route instance") {
  // Any split with at least 4/15 informed attains the minimum.
  const auto game = helpers::load("motivating");
  const auto rep = bcg::compute_adoption_set(game, threshold_options());
  REQUIRE(rep.converged);
  REQUIRE(rep.ranges.size() == 2);
  CHECK(rep.ranges[0].lo == doctest::Approx(4.0 / 15.0).epsilon(1e-4));
  CHECK(rep.ranges[0].hi == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(rep.ranges[1].lo == doctest::Approx(0.0).epsilon(1e-6));
  CHECK(rep.ranges[1].hi == doctest::Approx(11.0 / 15.0).epsilon(1e-4));
  CHECK(rep.ranges[0].in_support);
  CHECK(rep.ranges[1].in_support);
  // Psi at the minimum matches the equilibrium potential past the threshold.
  GameSpec inside = game;
  inside.sizes = {0.5, 0.5};
  const auto eq = bcg::solve_bwe(inside, helpers::tight(1e-12));
  CHECK(rep.psi_min == doctest::Approx(eq.psi).epsilon(1e-7));
}

TEST_CASE("adoption set with a uniquely supported population") {
  const auto game = helpers::load("single_tis");
  const auto rep = bcg::compute_adoption_set(game, threshold_options());
  REQUIRE(rep.converged);
  CHECK(rep.psi_min == doctest::Approx(1.5).epsilon(1e-6));
  CHECK(rep.ranges[0].lo == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(rep.ranges[0].hi == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(rep.ranges[0].in_support);
  CHECK(rep.ranges[1].hi <= 1e-3);
  CHECK_FALSE(rep.ranges[1].in_support);
}

TEST_CASE("adoption membership separates inside from outside") {
  const auto game = helpers::load("motivating");
  const auto rep = bcg::compute_adoption_set(game, threshold_options());
  CHECK(bcg::adoption_membership(game, {0.5, 0.5}, rep));
  CHECK(bcg::adoption_membership(game, {1.0, 0.0}, rep));
  CHECK_FALSE(bcg::adoption_membership(game, {0.1, 0.9}, rep));
  CHECK_FALSE(bcg::adoption_membership(game, {0.05, 0.95}, rep));
  CHECK_THROWS_AS(bcg::adoption_membership(game, {0.5}, rep), std::invalid_argument);
}

TEST_CASE("adoption equilibrium verification") {
  const auto game = helpers::load("motivating");
  // Inside the adoption set both populations pay the same.
  auto check = bcg::verify_adoption_equilibrium(game, {0.5, 0.5}, helpers::tight(1e-12));
  CHECK(check.equilibrium);
  REQUIRE(check.costs.size() == 2);
  CHECK(check.costs[0] == doctest::Approx(check.costs[1]).epsilon(1e-6));

  // Below the threshold the informed do strictly better: still an adoption
  // equilibrium (nobody subscribed wants to switch down), and the value is
  // positive.
  check = bcg::verify_adoption_equilibrium(game, {0.1, 0.9}, helpers::tight(1e-12));
  CHECK(check.costs[1] - check.costs[0] > 0.1);
  CHECK_FALSE(check.equilibrium);  // population 1 pays more yet is subscribed

  // Single-population vectors are always equilibria of the trivial kind.
  const auto single = bcg::verify_adoption_equilibrium(game, {1.0, 0.0},
                                                       helpers::tight(1e-12));
  CHECK(single.equilibrium);
}

TEST_CASE("equilibrium adoption points coincide with set membership") {
  const auto game = helpers::load("benchmark");
  const auto rep = bcg::compute_adoption_set(game, threshold_options());
  REQUIRE(rep.converged);
  for (double l : {0.05, 0.1726, 0.3, 0.6, 0.9618, 0.99}) {
    const bool inside = bcg::adoption_membership(game, {l, 1.0 - l}, rep);
    const bool expect = l >= rep.ranges[0].lo - 1e-3 && l <= rep.ranges[0].hi + 1e-3;
    if (std::abs(l - rep.ranges[0].lo) > 1e-3 && std::abs(l - rep.ranges[0].hi) > 1e-3)
      CHECK(inside == expect);
  }
}

TEST_CASE("inefficiency report orders the three cost levels") {
  for (const char* name : {"motivating", "benchmark", "three_pop", "non_necessary"}) {
    const auto game = helpers::load(name);
    const auto rep = bcg::inefficiency_report(game, helpers::tight(1e-11));
    CHECK(rep.ordered);
    CHECK(rep.ratio_opt >= 1.0 - 1e-9);
    CHECK(rep.ratio_so >= rep.ratio_opt - 1e-9);
    CHECK(rep.cost_so <= rep.cost_opt + 1e-6 * (1.0 + std::abs(rep.cost_opt)));
    CHECK(rep.cost_opt <= rep.cost_eq + 1e-6 * (1.0 + std::abs(rep.cost_eq)));
  }
}

TEST_CASE("affine selfish routing loses exactly a third in the worst case") {
  const auto game = helpers::load("pigou");
  const auto rep = bcg::inefficiency_report(game, helpers::tight(1e-12));
  CHECK(rep.cost_eq == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(rep.cost_opt == doctest::Approx(0.75).epsilon(1e-6));
  CHECK(rep.ratio_opt == doctest::Approx(4.0 / 3.0).epsilon(1e-5));
}

TEST_CASE("homogeneous instances have efficient equilibria") {
  const auto game = helpers::load("homogeneous");
  const auto rep = bcg::inefficiency_report(game, helpers::tight(1e-12));
  CHECK(rep.homogeneous);
  CHECK(rep.homogeneous_reason.empty());
  CHECK(rep.ratio_opt == doctest::Approx(1.0).epsilon(1e-6));

  const auto bench = bcg::inefficiency_report(helpers::load("benchmark"),
                                              helpers::tight(1e-12));
  CHECK_FALSE(bench.homogeneous);
  CHECK_FALSE(bench.homogeneous_reason.empty());
}

TEST_CASE("uninformed traveler never beats informed peers at equilibrium") {
  std::mt19937 rng(321);
  for (int trial = 0; trial < 5; ++trial) {
    const GameSpec game = helpers::random_affine(rng, /*uninformed_second=*/true);
    const auto rep = bcg::solve_bwe(game, helpers::tight(1e-11));
    REQUIRE(rep.converged);
    REQUIRE(rep.certified);
    // Mimicry bound: an informed population can always copy the uninformed
    // split, so at a certified point the gap is at most the cost slack.
    CHECK(rep.population_costs[1] >= rep.population_costs[0] - 2.0 * rep.tolerances.cost);
  }
}
