#pragma once

#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nela/graph.hpp"
#include "nela/nela_policy.hpp"
#include "nela/policy.hpp"

namespace nela {

/// Exploration constants shared by all baselines.
struct RidgeConfig {
  double lambda1 = 1.0;
  double sigma = 0.01;
  double delta = 0.001;
  double s_theta = 1.0;
};

/// Online ridge regression with a rank-one maintained inverse and
/// log-determinant. The prior precision defaults to lambda1 * I.
class RidgeModel {
public:
  RidgeModel(int dim, const RidgeConfig& config);
  /// Custom symmetric positive-definite prior precision.
  RidgeModel(Eigen::MatrixXd prior_precision, const RidgeConfig& config);

  int dim() const { return static_cast<int>(b_.size()); }
  void update(const Eigen::Ref<const Eigen::VectorXd>& z, double reward);
  /// sigma sqrt(logdet A - logdet A0 - 2 log delta) + sqrt(lambda1) s_theta.
  double alpha() const;
  /// ||z||_{A^-1}.
  double width(const Eigen::Ref<const Eigen::VectorXd>& z) const;

  const Eigen::MatrixXd& a() const { return a_; }
  const Eigen::MatrixXd& a_inv() const { return a_inv_; }
  const Eigen::VectorXd& b() const { return b_; }
  const Eigen::VectorXd& theta_hat() const { return theta_hat_; }
  double log_det_a() const { return log_det_a_; }

private:
  RidgeConfig config_;
  Eigen::MatrixXd a_;
  Eigen::MatrixXd a_inv_;
  Eigen::VectorXd b_;
  Eigen::VectorXd theta_hat_;
  double log_det_a_ = 0.0;
  double log_det_prior_ = 0.0;
};

/// One d-dimensional model shared by every user.
class LinUcbPolicy : public Policy {
public:
  LinUcbPolicy(int n, int d, const RidgeConfig& config);

  std::string name() const override { return "linucb"; }
  int select(int user, const ArmSet& arms) const override;
  void update(int user, const Eigen::Ref<const Eigen::VectorXd>& arm, double reward) override;

  const RidgeModel& model() const { return model_; }

private:
  int n_;
  RidgeModel model_;
};

/// Independent d-dimensional models, one per user.
class NLinUcbPolicy : public Policy {
public:
  NLinUcbPolicy(int n, int d, const RidgeConfig& config);

  std::string name() const override { return "nlinucb"; }
  int select(int user, const ArmSet& arms) const override;
  void update(int user, const Eigen::Ref<const Eigen::VectorXd>& arm, double reward) override;

  const RidgeModel& model(int user) const { return models_.at(static_cast<std::size_t>(user)); }

private:
  std::vector<RidgeModel> models_;
};

/// NELA's ridge over mixed features with the residual machinery switched
/// off and the standard self-normalized width (s_v = 0).
NelaConfig colin_config(const RidgeConfig& config);
std::unique_ptr<NelaPolicy> make_colin_policy(InfluenceMatrix w, int d, const RidgeConfig& config);

/// prior = lambda1 (L kron I_d + epsilon I) where L is the Laplacian of
/// S = (P + P^T) / 2 and P = W^T rescaled to be row-stochastic. Throws
/// InputError when the prior is not positive definite.
Eigen::MatrixXd graph_prior_precision(const InfluenceMatrix& w, int d, double lambda1,
                                      double epsilon);

/// Laplacian-smoothed ridge over the raw user blocks vec(X), no W mixing.
class GraphUcbPolicy : public Policy {
public:
  GraphUcbPolicy(const InfluenceMatrix& w, int d, const RidgeConfig& config,
                 double epsilon = 0.01);

  std::string name() const override { return "graphucb"; }
  int select(int user, const ArmSet& arms) const override;
  void update(int user, const Eigen::Ref<const Eigen::VectorXd>& arm, double reward) override;

  const RidgeModel& model() const { return model_; }

private:
  int n_;
  int d_;
  RidgeModel model_;
};

}  // namespace nela
