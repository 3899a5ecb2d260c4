#include "nela/baselines.hpp"

#include <cmath>
#include <string>

#include "nela/errors.hpp"

namespace nela {

RidgeModel::RidgeModel(int dim, const RidgeConfig& config)
    : RidgeModel(Eigen::MatrixXd::Identity(dim, dim) * config.lambda1, config) {}

RidgeModel::RidgeModel(Eigen::MatrixXd prior_precision, const RidgeConfig& config)
    : config_(config), a_(std::move(prior_precision)) {
  if (!(config.lambda1 > 0.0)) throw InputError("lambda1 must be > 0");
  if (a_.rows() < 1 || a_.rows() != a_.cols()) throw InputError("prior must be square");
  Eigen::LLT<Eigen::MatrixXd> llt(a_);
  if (llt.info() != Eigen::Success) throw InputError("prior precision is not positive definite");
  a_inv_ = llt.solve(Eigen::MatrixXd::Identity(a_.rows(), a_.cols()));
  log_det_prior_ = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  log_det_a_ = log_det_prior_;
  b_ = Eigen::VectorXd::Zero(a_.rows());
  theta_hat_ = Eigen::VectorXd::Zero(a_.rows());
}

void RidgeModel::update(const Eigen::Ref<const Eigen::VectorXd>& z, double reward) {
  const Eigen::VectorXd a_inv_z = a_inv_ * z;
  const double denom = 1.0 + z.dot(a_inv_z);
  a_inv_.noalias() -= (a_inv_z / denom) * a_inv_z.transpose();
  a_.noalias() += z * z.transpose();
  log_det_a_ += std::log(denom);
  b_ += reward * z;
  theta_hat_.noalias() = a_inv_ * b_;
}

double RidgeModel::alpha() const {
  const double info = log_det_a_ - log_det_prior_ - 2.0 * std::log(config_.delta);
  return config_.sigma * std::sqrt(std::max(info, 0.0)) +
         std::sqrt(config_.lambda1) * config_.s_theta;
}

double RidgeModel::width(const Eigen::Ref<const Eigen::VectorXd>& z) const {
  return std::sqrt(std::max(z.dot(a_inv_ * z), 0.0));
}

LinUcbPolicy::LinUcbPolicy(int n, int d, const RidgeConfig& config) : n_(n), model_(d, config) {}

int LinUcbPolicy::select(int user, const ArmSet& arms) const {
  if (user < 0 || user >= n_) throw InputError("user id out of range");
  const double a = model_.alpha();
  Eigen::VectorXd scores = arms.arms.transpose() * model_.theta_hat();
  for (int m = 0; m < arms.size(); ++m) scores(m) += a * model_.width(arms.arm(m));
  return argmax_lowest(scores);
}

void LinUcbPolicy::update(int /*user*/, const Eigen::Ref<const Eigen::VectorXd>& arm,
                          double reward) {
  model_.update(arm, reward);
}

NLinUcbPolicy::NLinUcbPolicy(int n, int d, const RidgeConfig& config)
    : models_(static_cast<std::size_t>(n), RidgeModel(d, config)) {}

int NLinUcbPolicy::select(int user, const ArmSet& arms) const {
  const RidgeModel& model = models_.at(static_cast<std::size_t>(user));
  const double a = model.alpha();
  Eigen::VectorXd scores = arms.arms.transpose() * model.theta_hat();
  for (int m = 0; m < arms.size(); ++m) scores(m) += a * model.width(arms.arm(m));
  return argmax_lowest(scores);
}

void NLinUcbPolicy::update(int user, const Eigen::Ref<const Eigen::VectorXd>& arm, double reward) {
  models_.at(static_cast<std::size_t>(user)).update(arm, reward);
}

NelaConfig colin_config(const RidgeConfig& config) {
  NelaConfig c;
  c.lambda1 = config.lambda1;
  c.sigma = config.sigma;
  c.delta = config.delta;
  c.s_theta = config.s_theta;
  c.s_v = 0.0;
  c.residual_enabled = false;
  return c;
}

std::unique_ptr<NelaPolicy> make_colin_policy(InfluenceMatrix w, int d, const RidgeConfig& config) {
  return std::make_unique<NelaPolicy>(std::move(w), d, colin_config(config), "colin");
}

Eigen::MatrixXd graph_prior_precision(const InfluenceMatrix& w, int d, double lambda1,
                                      double epsilon) {
  const int n = w.n();
  Eigen::MatrixXd p = w.matrix().transpose();
  for (int i = 0; i < n; ++i) {
    const double s = p.row(i).sum();
    if (s > 0.0) p.row(i) /= s;
  }
  // Laplacian of the symmetrized walk (P + P^T) / 2. It is positive
  // semidefinite for every W and equals (L + L^T) / 2 when P is doubly
  // stochastic.
  const Eigen::MatrixXd sym = 0.5 * (p + p.transpose());
  Eigen::MatrixXd smooth = -sym;
  smooth.diagonal() += sym.rowwise().sum();

  Eigen::MatrixXd prior = Eigen::MatrixXd::Zero(n * d, n * d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (smooth(i, j) != 0.0)
        prior.block(i * d, j * d, d, d).diagonal().setConstant(smooth(i, j));
  prior.diagonal().array() += epsilon;
  prior *= lambda1;

  Eigen::LLT<Eigen::MatrixXd> llt(prior);
  if (llt.info() != Eigen::Success ||
      llt.matrixL().toDenseMatrix().diagonal().minCoeff() < 1e-7) {
    throw InputError("graph prior is singular; increase epsilon");
  }
  return prior;
}

GraphUcbPolicy::GraphUcbPolicy(const InfluenceMatrix& w, int d, const RidgeConfig& config,
                               double epsilon)
    : n_(w.n()), d_(d), model_(graph_prior_precision(w, d, config.lambda1, epsilon), config) {}

int GraphUcbPolicy::select(int user, const ArmSet& arms) const {
  if (user < 0 || user >= n_) throw InputError("user id out of range");
  const double a = model_.alpha();
  const auto theta_u = model_.theta_hat().segment(user * d_, d_);
  const auto block = model_.a_inv().block(user * d_, user * d_, d_, d_);
  Eigen::VectorXd scores = arms.arms.transpose() * theta_u;
  for (int m = 0; m < arms.size(); ++m) {
    const auto x = arms.arm(m);
    scores(m) += a * std::sqrt(std::max(x.dot(block * x), 0.0));
  }
  return argmax_lowest(scores);
}

void GraphUcbPolicy::update(int user, const Eigen::Ref<const Eigen::VectorXd>& arm,
                            double reward) {
  Eigen::VectorXd z = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_) * d_);
  z.segment(user * d_, d_) = arm;
  model_.update(z, reward);
}

}  // namespace nela
