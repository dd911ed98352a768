#pragma once

#include <string>
#include <vector>

namespace bcg {

// Joint type profiles t = (t^0, ..., t^{I-1}) enumerated lexicographically,
// last population varying fastest. Index 0 is the reference profile used
// wherever a fixed "any profile" choice is needed.
struct TypeProfileSpace {
  std::vector<int> sizes;

  int populations() const { return static_cast<int>(sizes.size()); }
  int count() const;
  int stride(int i) const;
  int index(const std::vector<int>& t) const;
  std::vector<int> decode(int profile) const;
  int component(int profile, int i) const;
  // Profile equal to `profile` except coordinate i replaced by ti.
  int replace(int profile, int i, int ti) const;
  // Profiles of all populations except i, lexicographic; count and
  // composition with a type of population i into a full profile index.
  int count_excluding(int i) const;
  int compose(int i, int ti, int others) const;
};

struct InformationStructure {
  std::vector<std::string> states;
  std::vector<double> prior;                    // theta, per state
  std::vector<std::vector<std::string>> types;  // labels per population
  TypeProfileSpace tspace;
  std::vector<double> pi;  // pi[s * tspace.count() + t]

  int num_states() const { return static_cast<int>(states.size()); }
  int num_populations() const { return tspace.populations(); }
  double prob(int state, int profile) const { return pi[state * tspace.count() + profile]; }
  double type_marginal(int i, int ti) const;  // Pr(t^i), positive by validation
  void validate() const;                      // throws std::invalid_argument
};

InformationStructure make_information(std::vector<std::string> states, std::vector<double> prior,
                                      std::vector<std::vector<std::string>> types,
                                      std::vector<double> pi);

// pi(s, t) = theta(s) * prod_i tables[i][s][t^i]; each table row-stochastic.
InformationStructure build_conditionally_independent(
    std::vector<std::string> states, std::vector<double> prior,
    std::vector<std::vector<std::string>> types,
    const std::vector<std::vector<std::vector<double>>>& tables);

// mu[i][ti][s * count_excluding(i) + others] = pi(s, t) / Pr(t^i).
struct Belief {
  std::vector<std::vector<std::vector<double>>> mu;
};

Belief interim_beliefs(const InformationStructure& info);

// True iff Pr(t^j | s, t^-j) = Pr(t^j) for all entries, i.e. the population's
// type is independent of the state and all other types.
bool is_uninformed(const InformationStructure& info, int population, double tol = 1e-10);

}  // namespace bcg
