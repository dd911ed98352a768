#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "bcg/analysis.hpp"
#include "bcg/game.hpp"
#include "bcg/solver.hpp"

namespace bcg {

// Malformed instance document; the message cites the offending path
// ("information.prior", "costs.e1.a", ...).
struct InstanceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// JSON instance document -> validated GameSpec. Sections: network
// {edges, routes}, costs {edge -> state (or "*") -> coefficients},
// information {states, prior, accuracy_tables | common_prior}, demand,
// sizes, optional options {allow_weak_costs}.
GameSpec load_instance(const std::string& path);
GameSpec parse_instance(const std::string& text);

// %.12g - the artifact-wide number format (12 significant digits).
std::string format_sig(double v);

std::string report_json(const GameSpec& game, const EquilibriumReport& report);
std::string thresholds_json(const GameSpec& game, const RegimeReport& report);
std::string sweep_csv(const SweepTable& table);

struct MembershipQuery {
  std::vector<double> lambda;
  bool member = false;
  bool equilibrium = false;
};

std::string adoption_json(const GameSpec& game, const AdoptionReport& report,
                          const std::vector<MembershipQuery>& queries);

struct SocialSweepRow {
  double lambda_i = 0.0;
  SocialReport report;
  bool ok = false;
  std::string status;
};

std::string social_csv(const std::vector<SocialSweepRow>& rows);

}  // namespace bcg
