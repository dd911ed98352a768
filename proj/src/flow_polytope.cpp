#include "bcg/flow_polytope.hpp"

namespace bcg {

std::vector<char> live_profiles(const GameSpec& game) {
  const int NT = game.info.tspace.count();
  std::vector<char> live(NT, 0);
  for (int t = 0; t < NT; ++t)
    for (int s = 0; s < game.num_states(); ++s)
      if (game.info.prob(s, t) > 0.0) {
        live[t] = 1;
        break;
      }
  return live;
}

FlowLpBuilder::FlowLpBuilder(const GameSpec& game, const std::vector<int>& m_pops,
                             bool with_lambda)
    : game_(game) {
  const int R = game.num_routes();
  const int NT = game.info.tspace.count();
  out_.num_routes = R;
  out_.num_profiles = NT;
  out_.m_offset.assign(game.num_populations(), -1);
  int next = NT * R;
  for (int i : m_pops) {
    out_.m_offset[i] = next;
    next += R;
  }
  if (with_lambda) {
    out_.lambda_offset = next;
    next += game.num_populations();
  }

  const double D = game.demand;
  out_.lp.c = Eigen::VectorXd::Zero(next);
  out_.lp.lower = Eigen::VectorXd::Zero(next);
  out_.lp.upper = Eigen::VectorXd::Constant(next, D);
  if (with_lambda)
    for (int i = 0; i < game.num_populations(); ++i) out_.lp.upper[out_.lambda_index(i)] = 1.0;
}

void FlowLpBuilder::add_row(const std::vector<std::pair<int, double>>& terms, double rhs,
                            bool equality) {
  if (equality) {
    eq_rows_.push_back(terms);
    eq_rhs_.push_back(rhs);
  } else {
    in_rows_.push_back(terms);
    in_rhs_.push_back(rhs);
  }
}

void FlowLpBuilder::add_balance_and_demand() {
  const auto& ts = game_.info.tspace;
  const int R = out_.num_routes;
  for (int i = 0; i < game_.num_populations(); ++i) {
    const int others = ts.count_excluding(i);
    for (int ti = 1; ti < ts.sizes[i]; ++ti)
      for (int o = 1; o < others; ++o)
        for (int r = 0; r < R; ++r)
          add_row({{out_.f_index(ts.compose(i, ti, o), r), 1.0},
                   {out_.f_index(ts.compose(i, 0, o), r), -1.0},
                   {out_.f_index(ts.compose(i, ti, 0), r), -1.0},
                   {out_.f_index(ts.compose(i, 0, 0), r), 1.0}},
                  0.0, true);
  }
  for (int t = 0; t < out_.num_profiles; ++t) {
    std::vector<std::pair<int, double>> row;
    for (int r = 0; r < R; ++r) row.emplace_back(out_.f_index(t, r), 1.0);
    add_row(row, game_.demand, true);
  }
}

void FlowLpBuilder::add_m_epigraph(int i) {
  const auto& ts = game_.info.tspace;
  for (int ti = 0; ti < ts.sizes[i]; ++ti)
    for (int r = 0; r < out_.num_routes; ++r)
      add_row({{out_.m_index(i, r), 1.0}, {out_.f_index(ts.compose(i, ti, 0), r), -1.0}}, 0.0,
              false);
}

void FlowLpBuilder::add_impact_bound(int i, double lambda_i) {
  std::vector<std::pair<int, double>> row;
  for (int r = 0; r < out_.num_routes; ++r) row.emplace_back(out_.m_index(i, r), -1.0);
  add_row(row, -(1.0 - lambda_i) * game_.demand, false);
}

void FlowLpBuilder::add_impact_bound_variable(int i) {
  std::vector<std::pair<int, double>> row;
  for (int r = 0; r < out_.num_routes; ++r) row.emplace_back(out_.m_index(i, r), -1.0);
  row.emplace_back(out_.lambda_index(i), -game_.demand);
  add_row(row, -game_.demand, false);
}

void FlowLpBuilder::add_pair_budget(int i, int j, double rest) {
  std::vector<std::pair<int, double>> row;
  for (int r = 0; r < out_.num_routes; ++r) row.emplace_back(out_.m_index(i, r), -1.0);
  for (int r = 0; r < out_.num_routes; ++r) row.emplace_back(out_.m_index(j, r), -1.0);
  add_row(row, -(1.0 + rest) * game_.demand, false);
}

void FlowLpBuilder::add_load_band(const EdgeLoad& w, double band) {
  const auto live = live_profiles(game_);
  const int E = game_.num_edges();
  for (int t = 0; t < out_.num_profiles; ++t) {
    if (!live[t]) continue;
    for (int e = 0; e < E; ++e) {
      std::vector<std::pair<int, double>> row;
      for (int r = 0; r < out_.num_routes; ++r) {
        bool on = false;
        for (int er : game_.network.routes[r])
          if (er == e) {
            on = true;
            break;
          }
        if (on) row.emplace_back(out_.f_index(t, r), 1.0);
      }
      const double we = w.w[t * E + e];
      add_row(row, we + band, false);
      std::vector<std::pair<int, double>> neg;
      for (auto& [idx, v] : row) neg.emplace_back(idx, -v);
      add_row(neg, -(we - band), false);
    }
  }
}

void FlowLpBuilder::add_lambda_simplex() {
  std::vector<std::pair<int, double>> row;
  for (int i = 0; i < game_.num_populations(); ++i) row.emplace_back(out_.lambda_index(i), 1.0);
  add_row(row, 1.0, true);
}

void FlowLpBuilder::set_objective(const std::vector<std::pair<int, double>>& terms) {
  out_.lp.c.setZero();
  for (auto& [idx, v] : terms) out_.lp.c[idx] += v;
}

FlowLp FlowLpBuilder::take() {
  const int n = static_cast<int>(out_.lp.c.size());
  out_.lp.A_eq = Eigen::MatrixXd::Zero(static_cast<int>(eq_rows_.size()), n);
  out_.lp.b_eq = Eigen::VectorXd::Zero(static_cast<int>(eq_rows_.size()));
  for (size_t k = 0; k < eq_rows_.size(); ++k) {
    for (auto& [idx, v] : eq_rows_[k]) out_.lp.A_eq(static_cast<int>(k), idx) += v;
    out_.lp.b_eq[static_cast<int>(k)] = eq_rhs_[k];
  }
  out_.lp.A_in = Eigen::MatrixXd::Zero(static_cast<int>(in_rows_.size()), n);
  out_.lp.b_in = Eigen::VectorXd::Zero(static_cast<int>(in_rows_.size()));
  for (size_t k = 0; k < in_rows_.size(); ++k) {
    for (auto& [idx, v] : in_rows_[k]) out_.lp.A_in(static_cast<int>(k), idx) += v;
    out_.lp.b_in[static_cast<int>(k)] = in_rhs_[k];
  }
  return std::move(out_);
}

}  // namespace bcg
