#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace nela {

/// Design rows for the residual regression. Row s has the served user's arm
/// in block [user*d, (user+1)*d) and zeros elsewhere, so the least-squares
/// problem separates into one d-dimensional problem per user. Per-block Gram
/// matrices and cross products are accumulated on insertion; targets are
/// frozen at insertion time unless refresh_targets() recomputes them.
class RegressionHistory {
public:
  struct Row {
    int user;
    Eigen::VectorXd arm;
    double target;
    double reward;
  };

  RegressionHistory(int n, int d);

  void append(int user, const Eigen::Ref<const Eigen::VectorXd>& arm, double target);
  /// `reward` is the raw payoff the target was derived from; it is only
  /// needed by refresh_targets().
  void append(int user, const Eigen::Ref<const Eigen::VectorXd>& arm, double target,
              double reward);

  /// Replaces every target with reward - arm^T offsets(:, user).
  void refresh_targets(const Eigen::Ref<const Eigen::MatrixXd>& offsets);

  int n() const { return n_; }
  int d() const { return d_; }
  int nd() const { return n_ * d_; }
  long size() const { return static_cast<long>(rows_.size()); }
  bool empty() const { return rows_.empty(); }
  const std::vector<Row>& rows() const { return rows_; }

  /// Sum of x x^T over rows served to `user`.
  const Eigen::MatrixXd& gram(int user) const { return gram_[user]; }
  /// Sum of x * target over rows served to `user`.
  const Eigen::VectorXd& cross(int user) const { return cross_[user]; }
  double target_sq_sum() const { return target_sq_; }
  int row_count(int user) const { return counts_[user]; }

  /// Dense design matrix (size() x nd). Test and debugging use only.
  Eigen::MatrixXd dense_design() const;
  Eigen::VectorXd targets() const;

private:
  int n_;
  int d_;
  std::vector<Row> rows_;
  std::vector<Eigen::MatrixXd> gram_;
  std::vector<Eigen::VectorXd> cross_;
  std::vector<Eigen::VectorXd> reward_cross_;
  std::vector<double> reward_sq_;
  std::vector<int> counts_;
  double target_sq_ = 0.0;
};

struct SupportEstimate {
  std::vector<int> j0;  ///< first-stage support, sorted
  std::vector<int> j1;  ///< second-stage support, subset of j0
  double lambda_t = 0.0;
};

/// lambda0 * sqrt(2 log(max(t, 2)) log(nd) / t).
double lambda_schedule(long t, int n, int d, double lambda0);

struct LassoOptions {
  double tol = 1e-8;
  int max_sweeps = 10000;
  /// Called after every full sweep with (sweep, objective).
  std::function<void(int, double)> on_sweep;
};

struct LassoResult {
  Eigen::VectorXd coef;
  int sweeps = 0;
  double objective = 0.0;
  double duality_gap = 0.0;
  double kkt_violation = 0.0;
};

/// Minimizes (1/t)||R - X v||^2 + lambda ||v||_1 by cyclic coordinate descent
/// over the block Gram statistics. Throws ConvergenceError if the sweep budget
/// runs out before the coordinate changes drop below tol and the KKT
/// conditions hold to tol * (1 + lambda).
LassoResult lasso_solve(const RegressionHistory& history, double lambda,
                        const LassoOptions& options = {},
                        const std::optional<Eigen::VectorXd>& warm_start = std::nullopt);

/// (1/t)||R - X v||^2 + lambda ||v||_1 evaluated from the Gram statistics.
double lasso_objective(const RegressionHistory& history, const Eigen::VectorXd& v,
                       double lambda);

/// j0 = {j : |v0_j| > 4 lambda_t}, j1 = {j in j0 : |v0_j| > 4 lambda_t sqrt(|j0|)}.
SupportEstimate two_stage_threshold(const Eigen::VectorXd& v0, double lambda_t);

/// Minimum-norm least squares on the columns in `support`; zero elsewhere.
Eigen::VectorXd restricted_least_squares(const RegressionHistory& history,
                                         const std::vector<int>& support);

/// Writes design rows, targets, coefficients and supports as CSV for fixtures.
void dump_regression_debug(const std::filesystem::path& dir, const RegressionHistory& history,
                           const Eigen::VectorXd& lasso_coef, const SupportEstimate& support,
                           const Eigen::VectorXd& refit);

}  // namespace nela
