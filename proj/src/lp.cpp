#include "bcg/lp.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace bcg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPivotTol = 1e-9;
constexpr double kDualTol = 1e-9;
constexpr int kRefactorInterval = 50;

enum class VarState { basic, at_lower, at_upper, free_zero };

// Working problem: rows Ax = b with slacks appended for inequality rows and
// one artificial column per row appended after those.
struct Tableau {
  int n_struct = 0;
  int n_slack = 0;
  int rows = 0;
  Eigen::MatrixXd A;     // rows x (n_struct + n_slack + rows)
  Eigen::VectorXd b;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  Eigen::VectorXd x;
  std::vector<VarState> state;
  std::vector<int> basis;      // variable index per row
  Eigen::MatrixXd binv;
  int pivots_since_refactor = 0;
  int iterations = 0;
  bool singular = false;

  int cols() const { return n_struct + n_slack + rows; }
  int artificial(int row) const { return n_struct + n_slack + row; }

  void refactor() {
    Eigen::MatrixXd B(rows, rows);
    for (int k = 0; k < rows; ++k) B.col(k) = A.col(basis[k]);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(B);
    binv = lu.inverse();
    pivots_since_refactor = 0;
  }

  // Recompute basic values from nonbasic ones.
  void recompute_basics() {
    Eigen::VectorXd rhs = b;
    for (int j = 0; j < cols(); ++j)
      if (state[j] != VarState::basic && x[j] != 0.0) rhs -= A.col(j) * x[j];
    Eigen::VectorXd xb = binv * rhs;
    for (int k = 0; k < rows; ++k) x[basis[k]] = xb[k];
  }

  // Gauss-Jordan update of binv after column `col` replaces basis row `row`;
  // `yhat` is binv * A.col(col). Returns false on a too-small pivot.
  bool update_binv(int row, const Eigen::VectorXd& yhat) {
    const double piv = yhat[row];
    if (std::abs(piv) < kPivotTol) return false;
    binv.row(row) /= piv;
    for (int k = 0; k < rows; ++k) {
      if (k == row) continue;
      const double f = yhat[k];
      if (f != 0.0) binv.row(k) -= f * binv.row(row);
    }
    ++pivots_since_refactor;
    return true;
  }
};

// One simplex phase: minimize cost over the current tableau.
// Returns optimal(true)/unbounded(false); singular failures set t.singular.
bool run_simplex(Tableau& t, const Eigen::VectorXd& cost, int max_iterations) {
  const int ncols = t.cols();
  while (t.iterations < max_iterations) {
    ++t.iterations;
    if (t.pivots_since_refactor >= kRefactorInterval) {
      t.refactor();
      t.recompute_basics();
    }

    Eigen::VectorXd cb(t.rows);
    for (int k = 0; k < t.rows; ++k) cb[k] = cost[t.basis[k]];
    Eigen::VectorXd y = t.binv.transpose() * cb;

    // Bland: first eligible column in index order.
    int enter = -1;
    int dir = 0;
    for (int j = 0; j < ncols; ++j) {
      if (t.state[j] == VarState::basic) continue;
      if (t.lower[j] == t.upper[j]) continue;  // fixed
      const double d = cost[j] - y.dot(t.A.col(j));
      if (t.state[j] == VarState::at_lower && d < -kDualTol) {
        enter = j;
        dir = +1;
        break;
      }
      if (t.state[j] == VarState::at_upper && d > kDualTol) {
        enter = j;
        dir = -1;
        break;
      }
      if (t.state[j] == VarState::free_zero && std::abs(d) > kDualTol) {
        enter = j;
        dir = d < 0.0 ? +1 : -1;
        break;
      }
    }
    if (enter < 0) return true;  // optimal for this phase

    Eigen::VectorXd yhat = t.binv * t.A.col(enter);

    // Ratio test: x[enter] moves by dir*step, basics move by -dir*yhat.
    double step_cap = kInf;  // bound-to-bound flip
    if (t.lower[enter] > -kInf && t.upper[enter] < kInf)
      step_cap = t.upper[enter] - t.lower[enter];
    double best = step_cap;
    int leave_row = -1;
    int leave_to_upper = 0;
    for (int k = 0; k < t.rows; ++k) {
      const double rate = -dir * yhat[k];
      const int v = t.basis[k];
      double limit = kInf;
      int to_upper = 0;
      if (rate > kPivotTol) {
        if (t.upper[v] < kInf) limit = (t.upper[v] - t.x[v]) / rate, to_upper = 1;
      } else if (rate < -kPivotTol) {
        if (t.lower[v] > -kInf) limit = (t.lower[v] - t.x[v]) / rate;
      }
      if (limit < 0.0) limit = 0.0;  // degenerate
      // Bland on ties: smallest variable index leaves.
      if (limit < best - 1e-12 || (limit <= best + 1e-12 && leave_row >= 0 &&
                                   v < t.basis[leave_row] && limit < kInf)) {
        best = std::min(best, limit);
        leave_row = k;
        leave_to_upper = to_upper;
      }
    }

    if (best == kInf && leave_row < 0) return false;  // unbounded

    const double step = best;
    // Move entering variable and basics.
    t.x[enter] += dir * step;
    for (int k = 0; k < t.rows; ++k) t.x[t.basis[k]] -= dir * step * yhat[k];

    if (leave_row < 0) {
      // Bound flip, no basis change.
      t.state[enter] = dir > 0 ? VarState::at_upper : VarState::at_lower;
      t.x[enter] = dir > 0 ? t.upper[enter] : t.lower[enter];
      continue;
    }

    const int leaving = t.basis[leave_row];
    if (!t.update_binv(leave_row, yhat)) {
      t.refactor();
      t.recompute_basics();
      yhat = t.binv * t.A.col(enter);
      if (!t.update_binv(leave_row, yhat)) {
        t.singular = true;
        return true;
      }
    }
    t.basis[leave_row] = enter;
    t.state[enter] = VarState::basic;
    t.state[leaving] = leave_to_upper ? VarState::at_upper : VarState::at_lower;
    t.x[leaving] = leave_to_upper ? t.upper[leaving] : t.lower[leaving];
  }
  t.singular = true;  // iteration safety net; should be unreachable with Bland
  return true;
}

Tableau build_tableau(const LinearProgram& lp) {
  const int n = lp.num_vars();
  const int m_eq = static_cast<int>(lp.b_eq.size());
  const int m_in = static_cast<int>(lp.b_in.size());

  Tableau t;
  t.n_struct = n;
  t.n_slack = m_in;
  t.rows = m_eq + m_in;
  t.A = Eigen::MatrixXd::Zero(t.rows, t.cols());
  t.b = Eigen::VectorXd::Zero(t.rows);
  if (m_eq > 0) {
    t.A.block(0, 0, m_eq, n) = lp.A_eq;
    t.b.head(m_eq) = lp.b_eq;
  }
  if (m_in > 0) {
    t.A.block(m_eq, 0, m_in, n) = lp.A_in;
    t.b.tail(m_in) = lp.b_in;
    for (int k = 0; k < m_in; ++k) t.A(m_eq + k, n + k) = 1.0;
  }

  t.lower = Eigen::VectorXd::Constant(t.cols(), 0.0);
  t.upper = Eigen::VectorXd::Constant(t.cols(), kInf);
  t.lower.head(n) = lp.lower;
  t.upper.head(n) = lp.upper;

  t.x = Eigen::VectorXd::Zero(t.cols());
  t.state.assign(t.cols(), VarState::at_lower);
  for (int j = 0; j < n + m_in; ++j) {
    if (t.lower[j] > -kInf) {
      t.x[j] = t.lower[j];
      t.state[j] = VarState::at_lower;
    } else if (t.upper[j] < kInf) {
      t.x[j] = t.upper[j];
      t.state[j] = VarState::at_upper;
    } else {
      t.x[j] = 0.0;
      t.state[j] = VarState::free_zero;
    }
  }

  // Artificial basis covering the initial residual.
  Eigen::VectorXd resid = t.b;
  for (int j = 0; j < n + m_in; ++j)
    if (t.x[j] != 0.0) resid -= t.A.col(j) * t.x[j];
  t.basis.resize(t.rows);
  for (int k = 0; k < t.rows; ++k) {
    const int a = t.artificial(k);
    t.A(k, a) = resid[k] >= 0.0 ? 1.0 : -1.0;
    t.x[a] = std::abs(resid[k]);
    t.state[a] = VarState::basic;
    t.basis[k] = a;
  }
  t.refactor();
  return t;
}

}  // namespace

void LinearProgram::validate() const {
  const int n = num_vars();
  if (lower.size() != n || upper.size() != n)
    throw std::invalid_argument("lp: bound vectors must match variable count");
  if (A_eq.size() > 0 && A_eq.cols() != n)
    throw std::invalid_argument("lp: A_eq column count mismatch");
  if (A_in.size() > 0 && A_in.cols() != n)
    throw std::invalid_argument("lp: A_in column count mismatch");
  if (A_eq.rows() != b_eq.size()) throw std::invalid_argument("lp: b_eq length mismatch");
  if (A_in.rows() != b_in.size()) throw std::invalid_argument("lp: b_in length mismatch");
  for (int k = 0; k < b_eq.size(); ++k)
    if (!std::isfinite(b_eq[k])) throw std::invalid_argument("lp: non-finite b_eq entry");
  for (int k = 0; k < b_in.size(); ++k)
    if (!std::isfinite(b_in[k])) throw std::invalid_argument("lp: non-finite b_in entry");
  for (int j = 0; j < n; ++j)
    if (lower[j] > upper[j]) throw std::invalid_argument("lp: crossing bounds");
}

LpSolution solve_lp(const LinearProgram& lp) {
  lp.validate();
  LpSolution out;
  Tableau t = build_tableau(lp);
  const int max_iterations = 10000 + 200 * (t.rows + t.cols());

  // Phase 1: minimize total artificial value.
  Eigen::VectorXd phase1 = Eigen::VectorXd::Zero(t.cols());
  for (int k = 0; k < t.rows; ++k) phase1[t.artificial(k)] = 1.0;
  run_simplex(t, phase1, max_iterations);
  if (t.singular) {
    out.status = LpStatus::failed;
    out.iterations = t.iterations;
    return out;
  }
  t.refactor();
  t.recompute_basics();
  double infeas = 0.0;
  for (int k = 0; k < t.rows; ++k) infeas += std::abs(t.x[t.artificial(k)]);
  const double bscale = t.rows > 0 ? 1.0 + t.b.cwiseAbs().maxCoeff() : 1.0;
  if (infeas > 1e-8 * bscale) {
    out.status = LpStatus::infeasible;
    out.iterations = t.iterations;
    return out;
  }

  // Pin artificials to zero for phase 2; basic ones may remain at level 0.
  for (int k = 0; k < t.rows; ++k) {
    const int a = t.artificial(k);
    t.lower[a] = 0.0;
    t.upper[a] = 0.0;
    if (t.state[a] != VarState::basic) t.x[a] = 0.0;
  }

  Eigen::VectorXd phase2 = Eigen::VectorXd::Zero(t.cols());
  phase2.head(t.n_struct) = lp.c;
  const bool bounded = run_simplex(t, phase2, max_iterations);
  if (t.singular) {
    out.status = LpStatus::failed;
    out.iterations = t.iterations;
    return out;
  }
  t.refactor();
  t.recompute_basics();

  out.iterations = t.iterations;
  if (!bounded) {
    out.status = LpStatus::unbounded;
    return out;
  }
  out.status = LpStatus::optimal;
  out.x = t.x.head(t.n_struct);
  out.objective = lp.c.dot(out.x);
  out.basis = t.basis;
  Eigen::VectorXd cb(t.rows);
  for (int k = 0; k < t.rows; ++k) cb[k] = phase2[t.basis[k]];
  out.duals = t.binv.transpose() * cb;
  out.reduced_costs = lp.c - (t.A.leftCols(t.n_struct).transpose() * out.duals);
  return out;
}

FeasibilityResult feasibility(const LinearProgram& lp) {
  LinearProgram probe = lp;
  probe.c = Eigen::VectorXd::Zero(lp.num_vars());
  const LpSolution sol = solve_lp(probe);
  FeasibilityResult out;
  out.feasible = sol.status == LpStatus::optimal;
  if (out.feasible) out.x = sol.x;
  return out;
}

namespace {

void print_number(std::ostream& os, double v) {
  if (v == kInf) {
    os << "inf";
    return;
  }
  if (v == -kInf) {
    os << "-inf";
    return;
  }
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  os << buf;
}

}  // namespace

void dump(const LinearProgram& lp, std::ostream& os) {
  os << "min:";
  for (int j = 0; j < lp.num_vars(); ++j) {
    os << ' ';
    print_number(os, lp.c[j]);
  }
  os << '\n';
  for (int k = 0; k < lp.A_eq.rows(); ++k) {
    os << "eq[" << k << "]:";
    for (int j = 0; j < lp.num_vars(); ++j) {
      os << ' ';
      print_number(os, lp.A_eq(k, j));
    }
    os << " = ";
    print_number(os, lp.b_eq[k]);
    os << '\n';
  }
  for (int k = 0; k < lp.A_in.rows(); ++k) {
    os << "in[" << k << "]:";
    for (int j = 0; j < lp.num_vars(); ++j) {
      os << ' ';
      print_number(os, lp.A_in(k, j));
    }
    os << " <= ";
    print_number(os, lp.b_in[k]);
    os << '\n';
  }
  for (int j = 0; j < lp.num_vars(); ++j) {
    os << "bnd[" << j << "]: ";
    print_number(os, lp.lower[j]);
    os << ' ';
    print_number(os, lp.upper[j]);
    os << '\n';
  }
}

}  // namespace bcg
