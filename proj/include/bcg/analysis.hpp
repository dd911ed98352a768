#pragma once

#include <string>
#include <vector>

#include "bcg/game.hpp"
#include "bcg/solver.hpp"

namespace bcg {

enum class Regime { lambda1, lambda2, lambda3, degenerate };
const char* regime_name(Regime r);  // "L1", "L2", "L3", "deg"

// max over positive-probability profiles and edges of |a - b|;
// zero-probability profiles carry no equilibrium information.
double load_deviation(const GameSpec& game, const EdgeLoad& a, const EdgeLoad& b);

struct ThresholdReport {
  int i = 0, j = 0;
  double lambda_lo = 0.0;  // below: population i's impact constraint binds
  double lambda_hi = 0.0;  // above: population j's impact constraint binds
  double rest = 0.0;       // combined size of the populations outside the pair
  EdgeLoad w_pair;         // loads of the pair-relaxed potential minimum
  double psi_pair = 0.0;
  double band = 0.0;       // load-band half-width actually used by the LPs
  Tolerances tolerances;
};

// Threshold sizes of population i against j. The pair flow program pins the
// loads; two LPs over the load-banded polytope maximize the auxiliary sums
// whose extremes give the thresholds. The band doubles (up to three times)
// if the banded polytope comes back infeasible.
ThresholdReport compute_thresholds(const GameSpec& game, int i, int j,
                                   const SolveOptions& options = {}, double band = 0.0);

// Pure size comparison against precomputed thresholds; boundary values fall
// in the (closed) middle regime, sizes at 0 or 1 - rest are degenerate.
Regime regime_of(double lambda_i, const ThresholdReport& thresholds);

struct RegimeReport {
  ThresholdReport thresholds;
  Regime regime = Regime::degenerate;
  double relative_value = 0.0;  // C^j - C^i at the solved equilibrium
  bool iic_tight_i = false;
  bool iic_tight_j = false;
  double load_dev = 0.0;  // distance of the equilibrium loads from w_pair
  bool consistent = false;  // label agrees with the measured tightness
};

RegimeReport classify_regime(const GameSpec& game, int i, int j,
                             const SolveOptions& options = {});

struct RelativeValueReport {
  double value = 0.0;        // C^j - C^i
  double directional = 0.0;  // -(Psi(lambda + eps z) - Psi(lambda)) / (eps D)
  double mismatch = 0.0;
  bool checked = false;  // false when the derivative check was skipped
};

// Cost difference between subscribing to i versus j, cross-checked against
// the forward directional derivative of the optimal potential along
// z = e_i - e_j with eps = 1e-4. The check is skipped within 2 eps of a
// supplied threshold (a kink of Psi) or when j cannot give up eps mass.
RelativeValueReport relative_value(const GameSpec& game, int i, int j,
                                   const SolveOptions& options = {}, double kink_lo = -1.0,
                                   double kink_hi = -1.0);

struct SweepRow {
  double lambda_i = 0.0;
  double psi = 0.0;
  double cost_i = 0.0;
  double cost_j = 0.0;
  double value = 0.0;  // C^j - C^i
  Regime regime = Regime::degenerate;
  double load_dev = 0.0;
  bool ok = false;
  std::string status;
};

struct SweepTable {
  int i = 0, j = 0;
  ThresholdReport thresholds;
  std::vector<SweepRow> rows;
  // Shape verdicts over the grid, excluding the single row adjacent to each
  // regime boundary: the potential must fall, stay flat, then rise.
  bool decreasing_ok = false;
  bool flat_ok = false;
  bool increasing_ok = false;
  bool bathtub_ok = false;
  bool value_monotone_ok = false;  // C^j - C^i non-increasing along the grid
};

// One equilibrium solve per grid value of lambda_i (lambda_j absorbs the
// difference); rows keep grid order regardless of scheduling. Grid values
// must be increasing and inside the open interval (0, 1 - rest).
SweepTable bathtub_sweep(const GameSpec& game, int i, int j, const std::vector<double>& grid,
                         const SolveOptions& options = {}, int jobs = 1);

struct AdoptionRange {
  double lo = 0.0;
  double hi = 0.0;
  bool in_support = false;  // appears with positive rate in some member
};

struct AdoptionReport {
  EdgeLoad w_dag;  // loads shared by every potential-minimizing size vector
  double psi_min = 0.0;
  std::vector<AdoptionRange> ranges;  // per population
  bool converged = false;
  double band = 0.0;
  Tolerances tolerances;
};

// The set of size vectors attaining the unconstrained potential minimum:
// solves the relaxed flow program for w_dag, then per-population LPs with
// the sizes as variables give each population's achievable range.
AdoptionReport compute_adoption_set(const GameSpec& game, const SolveOptions& options = {},
                                    double band = 0.0);

// Feasibility of the banded polytope with the impact bounds fixed at the
// queried size vector.
bool adoption_membership(const GameSpec& game, const std::vector<double>& lambda,
                         const AdoptionReport& report);

struct AdoptionCheck {
  bool equilibrium = false;
  std::vector<double> costs;  // per population, min-form for empty ones
  double tol = 0.0;
};

// True iff no subscribed population could lower its cost by switching:
// lambda_i > 0 implies C^i <= min_j C^j + eps_cost.
AdoptionCheck verify_adoption_equilibrium(const GameSpec& game,
                                          const std::vector<double>& lambda,
                                          const SolveOptions& options = {});

struct SocialReport {
  double cost_eq = 0.0;   // average equilibrium cost
  double cost_opt = 0.0;  // informationally constrained planner
  double cost_so = 0.0;   // fully informed planner
  double ratio_opt = 0.0;
  double ratio_so = 0.0;
  bool homogeneous = false;
  std::string homogeneous_reason;
  bool ordered = false;  // cost_so <= cost_opt <= cost_eq within tolerance
};

SocialReport inefficiency_report(const GameSpec& game, const SolveOptions& options = {});

}  // namespace bcg
