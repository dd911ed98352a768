#include "bcg/information.hpp"

#include <cmath>
#include <stdexcept>

namespace bcg {

int TypeProfileSpace::count() const {
  int n = 1;
  for (int s : sizes) n *= s;
  return n;
}

int TypeProfileSpace::stride(int i) const {
  int n = 1;
  for (size_t j = i + 1; j < sizes.size(); ++j) n *= sizes[j];
  return n;
}

int TypeProfileSpace::index(const std::vector<int>& t) const {
  int idx = 0;
  for (size_t i = 0; i < sizes.size(); ++i) idx = idx * sizes[i] + t[i];
  return idx;
}

std::vector<int> TypeProfileSpace::decode(int profile) const {
  std::vector<int> t(sizes.size());
  for (int i = static_cast<int>(sizes.size()) - 1; i >= 0; --i) {
    t[i] = profile % sizes[i];
    profile /= sizes[i];
  }
  return t;
}

int TypeProfileSpace::component(int profile, int i) const {
  return (profile / stride(i)) % sizes[i];
}

int TypeProfileSpace::replace(int profile, int i, int ti) const {
  const int st = stride(i);
  const int cur = (profile / st) % sizes[i];
  return profile + (ti - cur) * st;
}

int TypeProfileSpace::count_excluding(int i) const {
  return count() / sizes[i];
}

int TypeProfileSpace::compose(int i, int ti, int others) const {
  int idx = 0;
  // Walk populations in order, consuming `others` digits for j != i.
  std::vector<int> digits(sizes.size());
  for (int j = static_cast<int>(sizes.size()) - 1; j >= 0; --j) {
    if (j == i) continue;
    digits[j] = others % sizes[j];
    others /= sizes[j];
  }
  digits[i] = ti;
  for (size_t j = 0; j < sizes.size(); ++j) idx = idx * sizes[j] + digits[j];
  return idx;
}

double InformationStructure::type_marginal(int i, int ti) const {
  double p = 0.0;
  const int others = tspace.count_excluding(i);
  for (int s = 0; s < num_states(); ++s)
    for (int o = 0; o < others; ++o) p += prob(s, tspace.compose(i, ti, o));
  return p;
}

void InformationStructure::validate() const {
  if (states.empty()) throw std::invalid_argument("information: no states");
  if (prior.size() != states.size())
    throw std::invalid_argument("information: prior length differs from state count");
  if (types.empty()) throw std::invalid_argument("information: no populations");
  if (tspace.sizes.size() != types.size())
    throw std::invalid_argument("information: type space size mismatch");
  for (size_t i = 0; i < types.size(); ++i) {
    if (types[i].empty())
      throw std::invalid_argument("information: population " + std::to_string(i) +
                                  " has no types");
    if (static_cast<int>(types[i].size()) != tspace.sizes[i])
      throw std::invalid_argument("information: type labels mismatch for population " +
                                  std::to_string(i));
  }
  const int NT = tspace.count();
  if (static_cast<int>(pi.size()) != num_states() * NT)
    throw std::invalid_argument("information: tensor size mismatch");

  double prior_sum = 0.0;
  for (double p : prior) {
    if (p < 0.0) throw std::invalid_argument("information: negative prior entry");
    prior_sum += p;
  }
  if (std::abs(prior_sum - 1.0) > 1e-10)
    throw std::invalid_argument("information: prior does not sum to 1");

  double total = 0.0;
  for (double p : pi) {
    if (p < 0.0) throw std::invalid_argument("information: negative tensor entry");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw std::invalid_argument("information: tensor does not sum to 1");

  for (int s = 0; s < num_states(); ++s) {
    double marg = 0.0;
    for (int t = 0; t < NT; ++t) marg += prob(s, t);
    if (std::abs(marg - prior[s]) > 1e-10)
      throw std::invalid_argument("information: tensor marginal differs from prior in state " +
                                  std::to_string(s));
  }

  for (int i = 0; i < num_populations(); ++i)
    for (int ti = 0; ti < tspace.sizes[i]; ++ti)
      if (type_marginal(i, ti) <= 0.0)
        throw std::invalid_argument("information: type " + std::to_string(ti) +
                                    " of population " + std::to_string(i) +
                                    " has zero probability");
}

InformationStructure make_information(std::vector<std::string> states, std::vector<double> prior,
                                      std::vector<std::vector<std::string>> types,
                                      std::vector<double> pi) {
  InformationStructure info;
  info.states = std::move(states);
  info.prior = std::move(prior);
  info.types = std::move(types);
  info.tspace.sizes.resize(info.types.size());
  for (size_t i = 0; i < info.types.size(); ++i)
    info.tspace.sizes[i] = static_cast<int>(info.types[i].size());
  info.pi = std::move(pi);
  info.validate();
  return info;
}

InformationStructure build_conditionally_independent(
    std::vector<std::string> states, std::vector<double> prior,
    std::vector<std::vector<std::string>> types,
    const std::vector<std::vector<std::vector<double>>>& tables) {
  const int S = static_cast<int>(states.size());
  const int I = static_cast<int>(types.size());
  if (static_cast<int>(tables.size()) != I)
    throw std::invalid_argument("information: one accuracy table per population required");
  for (int i = 0; i < I; ++i) {
    if (static_cast<int>(tables[i].size()) != S)
      throw std::invalid_argument("information: accuracy table of population " +
                                  std::to_string(i) + " must have one row per state");
    for (int s = 0; s < S; ++s) {
      const auto& row = tables[i][s];
      if (row.size() != types[i].size())
        throw std::invalid_argument("information: accuracy row length mismatch for population " +
                                    std::to_string(i));
      double sum = 0.0;
      for (double p : row) {
        if (p < 0.0)
          throw std::invalid_argument("information: negative accuracy entry for population " +
                                      std::to_string(i));
        sum += p;
      }
      if (std::abs(sum - 1.0) > 1e-10)
        throw std::invalid_argument("information: accuracy row of population " +
                                    std::to_string(i) + " state " + std::to_string(s) +
                                    " is not stochastic");
    }
  }

  TypeProfileSpace tspace;
  tspace.sizes.resize(I);
  for (int i = 0; i < I; ++i) tspace.sizes[i] = static_cast<int>(types[i].size());
  const int NT = tspace.count();

  std::vector<double> pi(static_cast<size_t>(S) * NT, 0.0);
  for (int s = 0; s < S; ++s) {
    for (int t = 0; t < NT; ++t) {
      double v = prior[s];
      for (int i = 0; i < I; ++i) v *= tables[i][s][tspace.component(t, i)];
      pi[static_cast<size_t>(s) * NT + t] = v;
    }
  }
  return make_information(std::move(states), std::move(prior), std::move(types), std::move(pi));
}

Belief interim_beliefs(const InformationStructure& info) {
  Belief b;
  const int I = info.num_populations();
  const int S = info.num_states();
  b.mu.resize(I);
  for (int i = 0; i < I; ++i) {
    const int Ti = info.tspace.sizes[i];
    const int others = info.tspace.count_excluding(i);
    b.mu[i].assign(Ti, std::vector<double>(static_cast<size_t>(S) * others, 0.0));
    for (int ti = 0; ti < Ti; ++ti) {
      const double pr = info.type_marginal(i, ti);
      for (int s = 0; s < S; ++s)
        for (int o = 0; o < others; ++o)
          b.mu[i][ti][static_cast<size_t>(s) * others + o] =
              info.prob(s, info.tspace.compose(i, ti, o)) / pr;
    }
  }
  return b;
}

bool is_uninformed(const InformationStructure& info, int population, double tol) {
  const int S = info.num_states();
  const int Tj = info.tspace.sizes[population];
  const int others = info.tspace.count_excluding(population);
  std::vector<double> marginal(Tj);
  for (int tj = 0; tj < Tj; ++tj) marginal[tj] = info.type_marginal(population, tj);
  for (int s = 0; s < S; ++s) {
    for (int o = 0; o < others; ++o) {
      double rest = 0.0;  // Pr(s, t^-j)
      for (int tj = 0; tj < Tj; ++tj) rest += info.prob(s, info.tspace.compose(population, tj, o));
      for (int tj = 0; tj < Tj; ++tj) {
        const double lhs = info.prob(s, info.tspace.compose(population, tj, o));
        if (std::abs(lhs - marginal[tj] * rest) > tol) return false;
      }
    }
  }
  return true;
}

}  // namespace bcg
