#include "bcg/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

namespace bcg {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw InstanceError(path + ": " + msg);
}

const json& need(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) fail(path, "expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) fail(path + "." + key, "missing");
  return *it;
}

double need_number(const json& v, const std::string& path) {
  if (!v.is_number()) fail(path, "expected a number");
  return v.get<double>();
}

std::vector<double> need_numbers(const json& v, const std::string& path) {
  if (!v.is_array() || v.empty()) fail(path, "expected a non-empty array of numbers");
  std::vector<double> out;
  out.reserve(v.size());
  for (size_t k = 0; k < v.size(); ++k)
    out.push_back(need_number(v[k], path + "[" + std::to_string(k) + "]"));
  return out;
}

std::vector<std::string> need_strings(const json& v, const std::string& path) {
  if (!v.is_array() || v.empty()) fail(path, "expected a non-empty array of strings");
  std::vector<std::string> out;
  out.reserve(v.size());
  for (size_t k = 0; k < v.size(); ++k) {
    if (!v[k].is_string()) fail(path + "[" + std::to_string(k) + "]", "expected a string");
    out.push_back(v[k].get<std::string>());
  }
  return out;
}

void flatten_tensor(const json& node, const std::vector<int>& sizes, size_t depth,
                    std::vector<double>& out, const std::string& path) {
  if (depth == sizes.size()) {
    out.push_back(need_number(node, path));
    return;
  }
  if (!node.is_array() || static_cast<int>(node.size()) != sizes[depth])
    fail(path, "expected an array of length " + std::to_string(sizes[depth]));
  for (size_t k = 0; k < node.size(); ++k)
    flatten_tensor(node[k], sizes, depth + 1, out, path + "[" + std::to_string(k) + "]");
}

json matrix_json(const std::vector<double>& flat, int rows, int cols) {
  json out = json::array();
  for (int r = 0; r < rows; ++r) {
    json row = json::array();
    for (int c = 0; c < cols; ++c) row.push_back(flat[r * cols + c]);
    out.push_back(row);
  }
  return out;
}

json blocks_json(const GameSpec& game, const std::vector<std::vector<double>>& per_pop) {
  const int R = game.num_routes();
  json out = json::array();
  for (int i = 0; i < game.num_populations(); ++i)
    out.push_back(matrix_json(per_pop[i], game.info.tspace.sizes[i], R));
  return out;
}

std::string csv_safe(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  return s;
}

}  // namespace

GameSpec parse_instance(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw InstanceError(std::string("document: ") + e.what());
  }
  if (!doc.is_object()) throw InstanceError("document: expected a JSON object");

  GameSpec game;

  const json& net = need(doc, "network", "document");
  game.network.edges = need_strings(need(net, "edges", "network"), "network.edges");
  std::unordered_map<std::string, int> edge_index;
  for (int e = 0; e < game.network.num_edges(); ++e) {
    if (!edge_index.emplace(game.network.edges[e], e).second)
      fail("network.edges", "duplicate edge '" + game.network.edges[e] + "'");
  }
  const json& routes = need(net, "routes", "network");
  if (!routes.is_array() || routes.empty()) fail("network.routes", "expected a non-empty array");
  for (size_t k = 0; k < routes.size(); ++k) {
    const std::string path = "network.routes[" + std::to_string(k) + "]";
    std::vector<int> route;
    for (const std::string& name : need_strings(routes[k], path)) {
      const auto it = edge_index.find(name);
      if (it == edge_index.end()) fail(path, "unknown edge '" + name + "'");
      route.push_back(it->second);
    }
    game.network.routes.push_back(std::move(route));
  }

  const json& info = need(doc, "information", "document");
  const std::vector<std::string> states =
      need_strings(need(info, "states", "information"), "information.states");
  const int S = static_cast<int>(states.size());
  const std::vector<double> prior =
      need_numbers(need(info, "prior", "information"), "information.prior");
  if (static_cast<int>(prior.size()) != S)
    fail("information.prior", "expected one entry per state");
  double prior_sum = 0.0;
  for (const double p : prior) {
    if (p < 0.0) fail("information.prior", "negative probability");
    prior_sum += p;
  }
  if (std::abs(prior_sum - 1.0) > 1e-10)
    fail("information.prior", "entries must sum to one (got " + format_sig(prior_sum) + ")");

  const json& costs = need(doc, "costs", "document");
  if (!costs.is_object()) fail("costs", "expected an object keyed by edge name");
  for (const auto& item : costs.items())
    if (!edge_index.count(item.key())) fail("costs", "unknown edge '" + item.key() + "'");
  game.costs.poly.resize(game.network.num_edges());
  for (int e = 0; e < game.network.num_edges(); ++e) {
    const std::string& name = game.network.edges[e];
    const json& per_edge = need(costs, name, "costs");
    if (!per_edge.is_object()) fail("costs." + name, "expected an object keyed by state");
    for (const auto& item : per_edge.items())
      if (item.key() != "*" &&
          std::find(states.begin(), states.end(), item.key()) == states.end())
        fail("costs." + name, "unknown state '" + item.key() + "'");
    game.costs.poly[e].resize(S);
    for (int s = 0; s < S; ++s) {
      const json* coeffs = nullptr;
      std::string path = "costs." + name + "." + states[s];
      if (per_edge.contains(states[s])) {
        coeffs = &per_edge.at(states[s]);
      } else if (per_edge.contains("*")) {
        coeffs = &per_edge.at("*");
        path = "costs." + name + ".*";
      } else {
        fail("costs." + name, "no entry for state '" + states[s] + "'");
      }
      game.costs.poly[e][s].coef = need_numbers(*coeffs, path);
    }
  }

  const bool has_tables = info.contains("accuracy_tables");
  const bool has_tensor = info.contains("common_prior");
  if (has_tables == has_tensor)
    fail("information", "expected exactly one of accuracy_tables or common_prior");
  try {
    if (has_tables) {
      const json& tables = info.at("accuracy_tables");
      if (!tables.is_array() || tables.empty())
        fail("information.accuracy_tables", "expected a non-empty array");
      std::vector<std::vector<std::string>> types;
      std::vector<std::vector<std::vector<double>>> rows;
      for (size_t i = 0; i < tables.size(); ++i) {
        const std::string path = "information.accuracy_tables[" + std::to_string(i) + "]";
        types.push_back(need_strings(need(tables[i], "types", path), path + ".types"));
        const json& table = need(tables[i], "table", path);
        if (!table.is_array() || static_cast<int>(table.size()) != S)
          fail(path + ".table", "expected one row per state");
        std::vector<std::vector<double>> mat;
        for (int s = 0; s < S; ++s) {
          mat.push_back(need_numbers(table[s], path + ".table[" + std::to_string(s) + "]"));
          if (mat.back().size() != types.back().size())
            fail(path + ".table[" + std::to_string(s) + "]", "expected one entry per type");
        }
        rows.push_back(std::move(mat));
      }
      game.info = build_conditionally_independent(states, prior, types, rows);
    } else {
      const json& cp = info.at("common_prior");
      const json& type_json = need(cp, "types", "information.common_prior");
      if (!type_json.is_array() || type_json.empty())
        fail("information.common_prior.types", "expected a non-empty array");
      std::vector<std::vector<std::string>> types;
      std::vector<int> sizes;
      for (size_t i = 0; i < type_json.size(); ++i) {
        types.push_back(need_strings(type_json[i],
                                     "information.common_prior.types[" + std::to_string(i) + "]"));
        sizes.push_back(static_cast<int>(types.back().size()));
      }
      const json& tensor = need(cp, "tensor", "information.common_prior");
      if (!tensor.is_array() || static_cast<int>(tensor.size()) != S)
        fail("information.common_prior.tensor", "expected one block per state");
      std::vector<double> pi;
      for (int s = 0; s < S; ++s)
        flatten_tensor(tensor[s], sizes, 0, pi,
                       "information.common_prior.tensor[" + std::to_string(s) + "]");
      game.info = make_information(states, prior, types, pi);
    }
  } catch (const std::invalid_argument& e) {
    throw InstanceError(std::string("information: ") + e.what());
  }

  game.demand = need_number(need(doc, "demand", "document"), "demand");
  if (!(game.demand > 0.0)) fail("demand", "expected a positive number");
  game.sizes = need_numbers(need(doc, "sizes", "document"), "sizes");
  if (static_cast<int>(game.sizes.size()) != game.num_populations())
    fail("sizes", "expected one entry per population");
  double size_sum = 0.0;
  for (const double v : game.sizes) {
    if (v < 0.0) fail("sizes", "negative population size");
    size_sum += v;
  }
  if (std::abs(size_sum - 1.0) > 1e-10)
    fail("sizes", "entries must sum to one (got " + format_sig(size_sum) + ")");

  EdgeCosts::Positivity mode = EdgeCosts::Positivity::strict;
  if (doc.contains("options")) {
    const json& options = doc.at("options");
    if (!options.is_object()) fail("options", "expected an object");
    if (options.contains("allow_weak_costs")) {
      if (!options.at("allow_weak_costs").is_boolean())
        fail("options.allow_weak_costs", "expected a boolean");
      if (options.at("allow_weak_costs").get<bool>()) mode = EdgeCosts::Positivity::weak;
    }
  }

  try {
    game.validate(mode);
  } catch (const std::invalid_argument& e) {
    throw InstanceError(std::string("instance: ") + e.what());
  }
  return game;
}

GameSpec load_instance(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InstanceError("file: cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_instance(buf.str());
}

std::string format_sig(double v) {
  if (v == 0.0) v = 0.0;  // normalize -0
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::string report_json(const GameSpec& game, const EquilibriumReport& report) {
  const int R = game.num_routes();
  const int E = game.num_edges();
  const int NT = game.info.tspace.count();
  ordered_json out;
  out["kind"] = "equilibrium";
  out["converged"] = report.converged;
  out["certified"] = report.certified;
  out["iterations"] = report.iterations;
  out["gap"] = report.gap;
  out["psi"] = report.psi;
  out["tolerances"] = {{"gap", report.tolerances.gap},
                       {"load", report.tolerances.load},
                       {"cost", report.tolerances.cost},
                       {"phi0", report.tolerances.phi0}};
  out["population_costs"] = report.population_costs;
  out["strategies"] = blocks_json(game, report.q.q);
  out["flows"] = matrix_json(report.f.f, NT, R);
  out["loads"] = matrix_json(report.w.w, NT, E);
  out["expected_costs"] = blocks_json(game, report.expected_cost);
  out["multipliers"] = {{"mu", report.multipliers.mu},
                        {"nu", blocks_json(game, report.multipliers.nu)}};
  return out.dump(2) + "\n";
}

std::string thresholds_json(const GameSpec& game, const RegimeReport& report) {
  const int E = game.num_edges();
  const int NT = game.info.tspace.count();
  ordered_json out;
  out["kind"] = "thresholds";
  out["pair"] = {report.thresholds.i, report.thresholds.j};
  out["lambda_lo"] = report.thresholds.lambda_lo;
  out["lambda_hi"] = report.thresholds.lambda_hi;
  out["rest"] = report.thresholds.rest;
  out["regime"] = regime_name(report.regime);
  out["relative_value"] = report.relative_value;
  out["iic_tight_i"] = report.iic_tight_i;
  out["iic_tight_j"] = report.iic_tight_j;
  out["load_dev"] = report.load_dev;
  out["consistent"] = report.consistent;
  out["psi_pair"] = report.thresholds.psi_pair;
  out["band"] = report.thresholds.band;
  out["pair_loads"] = matrix_json(report.thresholds.w_pair.w, NT, E);
  return out.dump(2) + "\n";
}

std::string sweep_csv(const SweepTable& table) {
  std::ostringstream out;
  out << "lambda_i,Psi,C_i,C_j,V_ij,regime,load_dev,status\n";
  for (const SweepRow& row : table.rows) {
    out << format_sig(row.lambda_i) << ',' << format_sig(row.psi) << ','
        << format_sig(row.cost_i) << ',' << format_sig(row.cost_j) << ','
        << format_sig(row.value) << ',' << regime_name(row.regime) << ','
        << format_sig(row.load_dev) << ',' << csv_safe(row.status) << '\n';
  }
  return out.str();
}

std::string adoption_json(const GameSpec& game, const AdoptionReport& report,
                          const std::vector<MembershipQuery>& queries) {
  const int E = game.num_edges();
  const int NT = game.info.tspace.count();
  ordered_json out;
  out["kind"] = "adoption";
  out["converged"] = report.converged;
  out["psi_min"] = report.psi_min;
  out["band"] = report.band;
  ordered_json ranges = ordered_json::array();
  for (const AdoptionRange& range : report.ranges)
    ranges.push_back(
        {{"lo", range.lo}, {"hi", range.hi}, {"in_support", range.in_support}});
  out["ranges"] = ranges;
  out["loads"] = matrix_json(report.w_dag.w, NT, E);
  ordered_json verdicts = ordered_json::array();
  for (const MembershipQuery& query : queries)
    verdicts.push_back({{"lambda", query.lambda},
                        {"member", query.member},
                        {"equilibrium", query.equilibrium}});
  out["membership"] = verdicts;
  return out.dump(2) + "\n";
}

std::string social_csv(const std::vector<SocialSweepRow>& rows) {
  std::ostringstream out;
  out << "lambda_i,C_eq,C_opt,C_so,ratio_opt,ratio_so,status\n";
  for (const SocialSweepRow& row : rows) {
    out << format_sig(row.lambda_i) << ',' << format_sig(row.report.cost_eq) << ','
        << format_sig(row.report.cost_opt) << ',' << format_sig(row.report.cost_so) << ','
        << format_sig(row.report.ratio_opt) << ',' << format_sig(row.report.ratio_so) << ','
        << csv_safe(row.status) << '\n';
  }
  return out.str();
}

}  // namespace bcg
