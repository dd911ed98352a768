#include "bcg/model.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

namespace bcg {

namespace {

void require_domain(double load) {
  if (!(load >= 0.0)) throw std::domain_error("cost evaluated at negative load");
}

}  // namespace

double CostPolynomial::eval(double load) const {
  require_domain(load);
  double v = 0.0;
  for (auto it = coef.rbegin(); it != coef.rend(); ++it) v = v * load + *it;
  return v;
}

double CostPolynomial::integral(double load) const {
  require_domain(load);
  // Horner on the antiderivative sum_k coef[k]/(k+1) * w^(k+1).
  double v = 0.0;
  for (int k = static_cast<int>(coef.size()) - 1; k >= 0; --k)
    v = v * load + coef[k] / (k + 1);
  return v * load;
}

double CostPolynomial::derivative(double load) const {
  require_domain(load);
  double v = 0.0;
  for (int k = static_cast<int>(coef.size()) - 1; k >= 1; --k)
    v = v * load + coef[k] * k;
  return v;
}

double CostPolynomial::marginal(double load) const {
  return eval(load) + load * derivative(load);
}

CostPolynomial CostPolynomial::marginal_polynomial() const {
  // d/dw of w * sum_k a_k w^k = sum_k (k+1) a_k w^k.
  CostPolynomial m;
  m.coef.resize(coef.size());
  for (size_t k = 0; k < coef.size(); ++k) m.coef[k] = coef[k] * static_cast<double>(k + 1);
  return m;
}

int CostPolynomial::degree() const {
  for (int k = static_cast<int>(coef.size()) - 1; k >= 0; --k)
    if (coef[k] != 0.0) return k;
  return 0;
}

bool CostPolynomial::coefficients_nonnegative() const {
  for (double a : coef)
    if (a < 0.0) return false;
  return true;
}

bool CostPolynomial::strictly_increasing() const {
  for (size_t k = 1; k < coef.size(); ++k)
    if (coef[k] > 0.0) return true;
  return false;
}

bool CostPolynomial::positive_at_zero() const { return !coef.empty() && coef[0] > 0.0; }

std::vector<std::vector<int>> Network::incidence() const {
  std::vector<std::vector<int>> inc(edges.size(), std::vector<int>(routes.size(), 0));
  for (size_t r = 0; r < routes.size(); ++r)
    for (int e : routes[r]) inc[e][r] = 1;
  return inc;
}

void Network::validate() const {
  if (routes.empty()) throw std::invalid_argument("network: at least one route required");
  if (edges.empty()) throw std::invalid_argument("network: at least one edge required");
  std::set<std::vector<int>> seen;
  for (size_t r = 0; r < routes.size(); ++r) {
    const auto& route = routes[r];
    if (route.empty())
      throw std::invalid_argument("network: route " + std::to_string(r) + " is empty");
    std::set<int> in_route;
    for (int e : route) {
      if (e < 0 || e >= num_edges())
        throw std::invalid_argument("network: route " + std::to_string(r) +
                                    " references unknown edge");
      if (!in_route.insert(e).second)
        throw std::invalid_argument("network: route " + std::to_string(r) +
                                    " repeats an edge");
    }
    if (!seen.insert(route).second)
      throw std::invalid_argument("network: duplicate route " + std::to_string(r));
  }
}

const CostPolynomial& EdgeCosts::at(int edge, int state) const {
  return poly.at(edge).at(state);
}

void EdgeCosts::validate(Positivity mode) const {
  if (poly.empty()) throw std::invalid_argument("costs: empty");
  const size_t states = poly[0].size();
  for (size_t e = 0; e < poly.size(); ++e) {
    if (poly[e].size() != states)
      throw std::invalid_argument("costs: state count mismatch on edge " + std::to_string(e));
    for (size_t s = 0; s < states; ++s) {
      const auto& p = poly[e][s];
      if (p.coef.empty())
        throw std::invalid_argument("costs: empty polynomial on edge " + std::to_string(e));
      if (!p.coefficients_nonnegative())
        throw std::invalid_argument("costs: negative coefficient on edge " + std::to_string(e));
      if (mode == Positivity::strict) {
        if (!p.strictly_increasing())
          throw std::invalid_argument("costs: edge " + std::to_string(e) + " state " +
                                      std::to_string(s) + " is not strictly increasing");
        if (!p.positive_at_zero())
          throw std::invalid_argument("costs: edge " + std::to_string(e) + " state " +
                                      std::to_string(s) + " is not positive at zero load");
      }
    }
  }
}

double eval_cost(const EdgeCosts& costs, int edge, int state, double load) {
  return costs.at(edge, state).eval(load);
}

double integral_cost(const EdgeCosts& costs, int edge, int state, double load) {
  return costs.at(edge, state).integral(load);
}

double marginal_cost(const EdgeCosts& costs, int edge, int state, double load) {
  return costs.at(edge, state).marginal(load);
}

HomogeneousCheck check_homogeneous_condition(const Network& network, const EdgeCosts& costs) {
  HomogeneousCheck out;
  const int E = costs.num_edges();
  const int S = costs.num_states();
  HomogeneousDecomposition dec;
  dec.degree = -1;
  dec.scale.assign(E, std::vector<double>(S, 0.0));
  dec.constant.assign(E, std::vector<double>(S, 0.0));

  for (int e = 0; e < E; ++e) {
    for (int s = 0; s < S; ++s) {
      const auto& p = costs.at(e, s).coef;
      int mono = -1;
      for (size_t k = 1; k < p.size(); ++k) {
        if (p[k] == 0.0) continue;
        if (mono >= 0) {
          out.reason = "edge " + std::to_string(e) + " state " + std::to_string(s) +
                       " has more than one non-constant monomial";
          return out;
        }
        mono = static_cast<int>(k);
      }
      if (mono < 0) {
        out.reason = "edge " + std::to_string(e) + " state " + std::to_string(s) +
                     " has no increasing part";
        return out;
      }
      if (dec.degree < 0) dec.degree = mono;
      if (mono != dec.degree) {
        out.reason = "monomial degree differs across edges/states (" +
                     std::to_string(dec.degree) + " vs " + std::to_string(mono) + ")";
        return out;
      }
      dec.scale[e][s] = p[mono];
      dec.constant[e][s] = p.empty() ? 0.0 : p[0];
    }
  }

  dec.route_constant.assign(S, 0.0);
  for (int s = 0; s < S; ++s) {
    for (size_t r = 0; r < network.routes.size(); ++r) {
      double sum = 0.0;
      for (int e : network.routes[r]) sum += dec.constant[e][s];
      if (r == 0) {
        dec.route_constant[s] = sum;
      } else if (sum != dec.route_constant[s]) {
        out.reason = "route constants differ in state " + std::to_string(s) + " (" +
                     std::to_string(dec.route_constant[s]) + " vs " + std::to_string(sum) + ")";
        return out;
      }
    }
  }

  out.accepted = true;
  out.decomposition = std::move(dec);
  return out;
}

}  // namespace bcg
