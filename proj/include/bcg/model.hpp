#pragma once

#include <optional>
#include <string>
#include <vector>

namespace bcg {

// Polynomial cost of load, c(w) = sum_k coef[k] * w^k with coef[k] >= 0.
// Strictly increasing costs (some coef[k] > 0 for k >= 1) are the normal
// case; weakly increasing ones are admitted only under an explicit flag.
struct CostPolynomial {
  std::vector<double> coef;

  double eval(double load) const;        // c(w), Horner
  double integral(double load) const;    // int_0^w c(z) dz
  double derivative(double load) const;  // c'(w)
  double marginal(double load) const;    // d/dw of w*c(w) = c(w) + w*c'(w)
  CostPolynomial marginal_polynomial() const;

  int degree() const;
  bool coefficients_nonnegative() const;
  bool strictly_increasing() const;
  bool positive_at_zero() const;
};

struct Network {
  std::vector<std::string> edges;
  // Each route is an ordered list of distinct edge indices; one
  // origin-destination pair is implied.
  std::vector<std::vector<int>> routes;

  int num_edges() const { return static_cast<int>(edges.size()); }
  int num_routes() const { return static_cast<int>(routes.size()); }
  // incidence[e][r] = 1 iff edge e lies on route r.
  std::vector<std::vector<int>> incidence() const;
  void validate() const;  // throws std::invalid_argument
};

// State-dependent edge costs, poly[e][s].
struct EdgeCosts {
  enum class Positivity { strict, weak };

  std::vector<std::vector<CostPolynomial>> poly;

  int num_edges() const { return static_cast<int>(poly.size()); }
  int num_states() const { return poly.empty() ? 0 : static_cast<int>(poly[0].size()); }
  const CostPolynomial& at(int edge, int state) const;
  void validate(Positivity mode) const;
};

double eval_cost(const EdgeCosts& costs, int edge, int state, double load);
double integral_cost(const EdgeCosts& costs, int edge, int state, double load);
double marginal_cost(const EdgeCosts& costs, int edge, int state, double load);

// c_e^s(w) = scale[e][s] * w^degree + constant[e][s], with
// sum over edges of a route of constant[e][s] equal to route_constant[s]
// for every route.
struct HomogeneousDecomposition {
  int degree = 0;
  std::vector<std::vector<double>> scale;
  std::vector<std::vector<double>> constant;
  std::vector<double> route_constant;
};

struct HomogeneousCheck {
  bool accepted = false;
  std::string reason;  // empty when accepted
  std::optional<HomogeneousDecomposition> decomposition;
};

// Accepts iff every edge cost is a single monomial of one instance-wide
// degree k >= 1 plus a constant, and the per-route constant sums agree
// across routes state by state.
HomogeneousCheck check_homogeneous_condition(const Network& network, const EdgeCosts& costs);

}  // namespace bcg
