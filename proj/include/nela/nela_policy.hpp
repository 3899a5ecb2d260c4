#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "nela/graph.hpp"
#include "nela/policy.hpp"
#include "nela/sparse_regression.hpp"

namespace nela {

struct NelaConfig {
  double lambda1 = 1.0;   ///< ridge weight on vec(Theta)
  double lambda0 = 0.02;  ///< Lasso schedule coefficient
  double sigma = 0.01;
  double delta = 0.001;
  /// Norm bounds on arms, vec(V) and vec(Theta). s1, the l1 bound on vec(V),
  /// only enters the regret constants and has no runtime role.
  double s_x = 1.0;
  double s_v = 10.0;
  double s_theta = 1.0;
  /// Rounds before the first Lasso fit. Negative selects 10 * ceil(log(nd)).
  long warmup_rounds = -1;
  long lasso_every = 1;
  /// Disables the residual estimate entirely (vHat stays 0, no detection).
  bool residual_enabled = true;
  /// Recompute every history target with the latest Theta hat before each
  /// Lasso fit instead of keeping the estimate current at insertion.
  bool refresh_targets = false;
  /// Replaces the confidence width when set. Test hook.
  std::optional<double> alpha_override;
  LassoOptions lasso;

  /// Throws InputError when a field is out of range.
  void validate() const;
  long effective_warmup(int nd) const;
};

/// s_v default for a population expected to hold `anomaly_count` anomalies
/// with residual coordinates bounded by 10.
double default_residual_bound(int anomaly_count);

/// Learner state between rounds. A = lambda1 I + sum z z^T over mixed
/// features z; a_inv and log_det_a track it through rank-one updates.
struct NelaState {
  int n = 0;
  int d = 0;
  Eigen::MatrixXd a;
  Eigen::MatrixXd a_inv;
  double log_det_a = 0.0;
  Eigen::VectorXd b;
  Eigen::VectorXd theta_hat;  ///< vec(Theta hat), user j in [j*d, (j+1)*d)
  Eigen::VectorXd v_hat;
  Eigen::VectorXd lasso_coef;  ///< last unthresholded Lasso fit (warm start)
  RegressionHistory history;
  SupportEstimate support;
  std::vector<int> detected;
  long t = 0;

  NelaState(int n, int d, double lambda1);

  int nd() const { return n * d; }
  /// Theta hat as a d x n matrix view.
  Eigen::Map<const Eigen::MatrixXd> theta_matrix() const {
    return {theta_hat.data(), d, n};
  }
  Eigen::Map<const Eigen::MatrixXd> v_matrix() const { return {v_hat.data(), d, n}; }
};

/// vec(X W^T) for the arm matrix X holding `arm` in column `user`: block j is
/// W(j, user) * arm.
Eigen::VectorXd mixed_feature(const Eigen::Ref<const Eigen::VectorXd>& arm, int user,
                              const InfluenceMatrix& w);

/// Confidence width (sigma + 2 s_x s_v) sqrt(logdet A - nd log lambda1 - 2 log delta)
/// + sqrt(lambda1) s_theta, floored at zero.
double alpha(const NelaState& state, const NelaConfig& config);

/// Upper-confidence scores for every arm of `arms` served to `user`.
Eigen::VectorXd arm_scores(const NelaState& state, const NelaConfig& config, int user,
                           const ArmSet& arms, const InfluenceMatrix& w);

int select_arm(const NelaState& state, const NelaConfig& config, int user, const ArmSet& arms,
               const InfluenceMatrix& w);

/// One round of learning: ridge update of Theta hat using the previous
/// residual estimate, history append, and (outside warm-up) the Lasso fit,
/// two-stage thresholding and restricted refit. Returns the detected users.
const std::vector<int>& update(NelaState& state, const NelaConfig& config, int user,
                               const Eigen::Ref<const Eigen::VectorXd>& arm, double reward,
                               const InfluenceMatrix& w);

/// Debug snapshot: diagonal d x d blocks of A, theta_hat, v_hat, supports and
/// detected set.
nlohmann::json snapshot(const NelaState& state);

class NelaPolicy : public Policy {
public:
  NelaPolicy(InfluenceMatrix w, int d, NelaConfig config, std::string name = "nela");

  std::string name() const override { return name_; }
  int select(int user, const ArmSet& arms) const override;
  void update(int user, const Eigen::Ref<const Eigen::VectorXd>& arm, double reward) override;
  std::vector<int> detected_anomalies() const override { return state_.detected; }

  const NelaState& state() const { return state_; }
  NelaState& mutable_state() { return state_; }
  const NelaConfig& config() const { return config_; }
  const InfluenceMatrix& graph() const { return w_; }

private:
  InfluenceMatrix w_;
  NelaConfig config_;
  NelaState state_;
  std::string name_;
};

}  // namespace nela
