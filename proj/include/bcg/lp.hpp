#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <vector>

namespace bcg {

// minimize c.x  s.t.  A_eq x = b_eq,  A_in x <= b_in,  lower <= x <= upper.
// +-infinity bounds allowed.
struct LinearProgram {
  Eigen::VectorXd c;
  Eigen::MatrixXd A_eq;
  Eigen::VectorXd b_eq;
  Eigen::MatrixXd A_in;
  Eigen::VectorXd b_in;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  int num_vars() const { return static_cast<int>(c.size()); }
  void validate() const;  // throws std::invalid_argument
};

enum class LpStatus { optimal, infeasible, unbounded, failed };

struct LpSolution {
  LpStatus status = LpStatus::failed;
  Eigen::VectorXd x;             // structural variables
  double objective = 0.0;
  std::vector<int> basis;        // basic column indices of the working form
  Eigen::VectorXd duals;         // row multipliers, eq rows then ineq rows
  Eigen::VectorXd reduced_costs; // structural reduced costs c - A^T y
  int iterations = 0;
};

// Two-phase primal simplex on the bounded-variable form, Bland's rule,
// dense basis inverse refreshed every 50 pivots, pivot tolerance 1e-9.
// Deterministic: identical inputs produce identical pivot sequences.
LpSolution solve_lp(const LinearProgram& lp);

struct FeasibilityResult {
  bool feasible = false;
  Eigen::VectorXd x;
};

// Phase-one only; the objective vector is ignored.
FeasibilityResult feasibility(const LinearProgram& lp);

// Fixed plain-text form (objective row, then rows, then bounds) for
// external cross-checking.
void dump(const LinearProgram& lp, std::ostream& os);

}  // namespace bcg
