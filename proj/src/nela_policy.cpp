#include "nela/nela_policy.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nela/errors.hpp"

namespace nela {

void NelaConfig::validate() const {
  if (!(lambda1 > 0.0)) throw InputError("lambda1 must be > 0");
  if (!(lambda0 >= 0.0)) throw InputError("lambda0 must be >= 0");
  if (!(sigma >= 0.0)) throw InputError("sigma must be >= 0");
  if (!(delta > 0.0 && delta <= 1.0)) throw InputError("delta must lie in (0, 1]");
  if (!(s_x >= 0.0 && s_v >= 0.0 && s_theta >= 0.0)) throw InputError("norm bounds must be >= 0");
  if (lasso_every < 1) throw InputError("lasso_every must be >= 1");
}

long NelaConfig::effective_warmup(int nd) const {
  if (warmup_rounds >= 0) return warmup_rounds;
  return 10 * static_cast<long>(std::ceil(std::log(static_cast<double>(nd))));
}

double default_residual_bound(int anomaly_count) {
  return 10.0 * std::sqrt(static_cast<double>(std::max(anomaly_count, 0)));
}

NelaState::NelaState(int n_users, int dim, double lambda1)
    : n(n_users),
      d(dim),
      a(Eigen::MatrixXd::Identity(n_users * dim, n_users * dim) * lambda1),
      a_inv(Eigen::MatrixXd::Identity(n_users * dim, n_users * dim) / lambda1),
      log_det_a(n_users * dim * std::log(lambda1)),
      b(Eigen::VectorXd::Zero(n_users * dim)),
      theta_hat(Eigen::VectorXd::Zero(n_users * dim)),
      v_hat(Eigen::VectorXd::Zero(n_users * dim)),
      lasso_coef(Eigen::VectorXd::Zero(n_users * dim)),
      history(n_users, dim) {}

Eigen::VectorXd mixed_feature(const Eigen::Ref<const Eigen::VectorXd>& arm, int user,
                              const InfluenceMatrix& w) {
  const auto d = arm.size();
  Eigen::VectorXd z = Eigen::VectorXd::Zero(w.n() * d);
  for (int j : w.support(user)) z.segment(j * d, d) = w(j, user) * arm;
  return z;
}

double alpha(const NelaState& state, const NelaConfig& config) {
  if (config.alpha_override) return *config.alpha_override;
  const double info = state.log_det_a - state.nd() * std::log(config.lambda1) -
                      2.0 * std::log(config.delta);
  const double width = (config.sigma + 2.0 * config.s_x * config.s_v) * std::sqrt(std::max(info, 0.0)) +
                       std::sqrt(config.lambda1) * config.s_theta;
  return std::max(width, 0.0);
}

namespace {

// Flat indices of the nonzero blocks of mixed_feature(., user, w).
std::vector<int> mixed_support(const InfluenceMatrix& w, int user, int d) {
  std::vector<int> idx;
  idx.reserve(w.support(user).size() * static_cast<std::size_t>(d));
  for (int j : w.support(user))
    for (int k = 0; k < d; ++k) idx.push_back(j * d + k);
  return idx;
}

}  // namespace

Eigen::VectorXd arm_scores(const NelaState& state, const NelaConfig& config, int user,
                           const ArmSet& arms, const InfluenceMatrix& w) {
  const int d = state.d;
  if (arms.dim() != d) throw InputError("arm dimension does not match the policy");

  // Exploitation: x^T [(Theta hat W)(:, user) + V hat(:, user)].
  const Eigen::VectorXd mean =
      state.theta_matrix() * w.matrix().col(user) + state.v_matrix().col(user);

  // ||mixed_feature(x)||^2_{A^-1} = x^T K x with K the W-weighted sum of the
  // d x d blocks of A^-1 over the neighbourhood of `user`.
  const auto& nbrs = w.support(user);
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(d, d);
  for (int j : nbrs)
    for (int l : nbrs)
      k += (w(j, user) * w(l, user)) * state.a_inv.block(j * d, l * d, d, d);

  const double width = alpha(state, config);
  Eigen::VectorXd scores = arms.arms.transpose() * mean;
  if (width != 0.0) {
    for (int m = 0; m < arms.size(); ++m) {
      const auto x = arms.arm(m);
      scores(m) += width * std::sqrt(std::max(x.dot(k * x), 0.0));
    }
  }
  return scores;
}

int select_arm(const NelaState& state, const NelaConfig& config, int user, const ArmSet& arms,
               const InfluenceMatrix& w) {
  if (arms.size() < 1) throw InputError("empty arm set");
  return argmax_lowest(arm_scores(state, config, user, arms, w));
}

const std::vector<int>& update(NelaState& state, const NelaConfig& config, int user,
                               const Eigen::Ref<const Eigen::VectorXd>& arm, double reward,
                               const InfluenceMatrix& w) {
  const int d = state.d;
  const int nd = state.nd();
  if (arm.size() != d) throw InputError("arm dimension does not match the policy");
  if (user < 0 || user >= state.n) throw InputError("user id out of range");

  // Rank-one update restricted to the nonzero entries of z.
  const std::vector<int> idx = mixed_support(w, user, d);
  const Eigen::VectorXd z = mixed_feature(arm, user, w);
  Eigen::VectorXd a_inv_z = Eigen::VectorXd::Zero(nd);
  for (int i : idx) a_inv_z += state.a_inv.col(i) * z(i);
  double quad = 0.0;
  for (int i : idx) quad += z(i) * a_inv_z(i);
  const double denom = 1.0 + quad;
  if (denom < 1.0 - 1e-12) throw std::logic_error("A inverse lost positive semidefiniteness");
  state.a_inv.noalias() -= (a_inv_z / denom) * a_inv_z.transpose();
  state.log_det_a += std::log(denom);
  for (int i : idx)
    for (int j : idx) state.a(i, j) += z(i) * z(j);

  // b uses the residual estimate from the previous round.
  const double v_part = arm.dot(state.v_hat.segment(user * d, d));
  state.b += z * (reward - v_part);
  state.theta_hat.noalias() = state.a_inv * state.b;

  const double graph_part = arm.dot(state.theta_matrix() * w.matrix().col(user));
  state.history.append(user, arm, reward - graph_part, reward);
  ++state.t;

  if (!config.residual_enabled) return state.detected;
  if (state.t <= config.effective_warmup(nd) || state.t % config.lasso_every != 0) {
    return state.detected;
  }

  if (config.refresh_targets) {
    state.history.refresh_targets(state.theta_matrix() * w.matrix());
  }
  const double lambda_t = lambda_schedule(state.t, state.n, d, config.lambda0);
  LassoResult fit = lasso_solve(state.history, lambda_t, config.lasso, state.lasso_coef);
  state.lasso_coef = std::move(fit.coef);
  state.support = two_stage_threshold(state.lasso_coef, lambda_t);
  state.v_hat = restricted_least_squares(state.history, state.support.j1);

  state.detected.clear();
  for (int j : state.support.j1) {
    const int u = j / d;
    if (state.detected.empty() || state.detected.back() != u) state.detected.push_back(u);
  }
  return state.detected;
}

nlohmann::json snapshot(const NelaState& state) {
  const int d = state.d;
  nlohmann::json blocks = nlohmann::json::array();
  for (int j = 0; j < state.n; ++j) {
    nlohmann::json block = nlohmann::json::array();
    for (int r = 0; r < d; ++r) {
      std::vector<double> row(static_cast<std::size_t>(d));
      for (int c = 0; c < d; ++c) row[c] = state.a(j * d + r, j * d + c);
      block.push_back(row);
    }
    blocks.push_back(block);
  }
  auto to_vec = [](const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  return {
      {"t", state.t},
      {"n", state.n},
      {"d", d},
      {"log_det_a", state.log_det_a},
      {"a_diag_blocks", blocks},
      {"theta_hat", to_vec(state.theta_hat)},
      {"v_hat", to_vec(state.v_hat)},
      {"support_j0", state.support.j0},
      {"support_j1", state.support.j1},
      {"lambda_t", state.support.lambda_t},
      {"detected", state.detected},
  };
}

NelaPolicy::NelaPolicy(InfluenceMatrix w, int d, NelaConfig config, std::string name)
    : w_(std::move(w)),
      config_(std::move(config)),
      state_(w_.n(), d, config_.lambda1),
      name_(std::move(name)) {
  config_.validate();
}

int NelaPolicy::select(int user, const ArmSet& arms) const {
  return select_arm(state_, config_, user, arms, w_);
}

void NelaPolicy::update(int user, const Eigen::Ref<const Eigen::VectorXd>& arm, double reward) {
  nela::update(state_, config_, user, arm, reward, w_);
}

}  // namespace nela
