#pragma once

#include <filesystem>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "nela/graph.hpp"

namespace nela {

using Rng = std::mt19937_64;

/// Hidden parameters of a simulated population.
struct GroundTruth {
  Eigen::MatrixXd theta;   ///< d x n, unit-norm columns
  Eigen::MatrixXd v;       ///< d x n residuals, zero outside the anomaly set
  std::vector<int> anomalies;  ///< sorted user ids
  /// Anomaly level: every anomalous residual has norm >= gamma. Zero when the
  /// population has no anomalies.
  double gamma = 0.0;

  int n() const { return static_cast<int>(theta.cols()); }
  int d() const { return static_cast<int>(theta.rows()); }
  bool is_anomalous(int user) const;
  /// Effective reward parameters Theta * W + V, one column per user.
  Eigen::MatrixXd payoff_parameters(const InfluenceMatrix& w) const;
};

/// Candidate context vectors for one round, stored as the columns of a d x M
/// matrix.
struct ArmSet {
  Eigen::MatrixXd arms;

  int size() const { return static_cast<int>(arms.cols()); }
  int dim() const { return static_cast<int>(arms.rows()); }
  auto arm(int m) const { return arms.col(m); }
};

struct RoundRecord {
  long t = 0;
  int user = 0;
  ArmSet arm_set;
  int chosen_arm = 0;
  double reward = 0.0;
  double expected_reward = 0.0;
  double optimal_reward = 0.0;
  double instant_regret = 0.0;
};

/// Draws theta columns as normalized standard Gaussians and plants
/// `anomaly_count` residuals, each with `nonzero_dims` coordinates drawn from
/// U(-10, 10). A positive `gamma_target` rescales every residual to exactly
/// that norm; zero keeps the raw draws.
GroundTruth generate_ground_truth(int n, int d, int anomaly_count, double gamma_target,
                                  int nonzero_dims, Rng& rng);

/// Builds a ground truth around externally supplied features (replay mode).
/// Anomalies are planted exactly as in generate_ground_truth.
GroundTruth ground_truth_from_features(Eigen::MatrixXd theta, int anomaly_count,
                                       double gamma_target, int nonzero_dims, Rng& rng);

/// Uniformly random user id in [0, n).
int sample_user(int n, Rng& rng);

/// Equicorrelated Gaussian arms before norm clipping: for every coordinate,
/// x_m = sqrt(c) z_0 + sqrt(1 - c) z_m so distinct arms have correlation c.
Eigen::MatrixXd sample_raw_arms(int arm_count, int d, double arm_correlation, Rng& rng);

/// sample_raw_arms followed by rescaling every arm with norm above 1 to the
/// unit sphere.
ArmSet sample_arm_set(int arm_count, int d, double arm_correlation, Rng& rng);

/// Uniform draw of `arm_count` distinct catalog columns.
ArmSet sample_catalog_arms(const Eigen::MatrixXd& catalog, int arm_count, Rng& rng);

/// Noiseless payoff x^T (Theta W + V)(:, user).
double expected_reward(const GroundTruth& gt, const InfluenceMatrix& w, int user,
                       const Eigen::Ref<const Eigen::VectorXd>& arm);

/// Serves `chosen_arm` and draws exactly one N(0, sigma^2) noise sample.
RoundRecord play_round(const GroundTruth& gt, const InfluenceMatrix& w, const ArmSet& arm_set,
                       int user, int chosen_arm, double sigma, Rng& rng);

/// Same as play_round but against precomputed payoff_parameters().
RoundRecord play_round(const Eigen::MatrixXd& payoff_params, const ArmSet& arm_set, int user,
                       int chosen_arm, double sigma, Rng& rng);

/// theta.csv, v.csv, anomalies.csv inside `dir`.
void export_ground_truth(const std::filesystem::path& dir, const GroundTruth& gt);
GroundTruth import_ground_truth(const std::filesystem::path& dir);

/// Loads a d x k feature matrix (one item or user per column). Columns within
/// 1e-6 of unit norm are renormalized; others are rejected.
Eigen::MatrixXd load_feature_matrix(const std::filesystem::path& path);

/// k distinct integers from [0, n), in draw order.
std::vector<int> sample_without_replacement(int k, int n, Rng& rng);

}  // namespace nela
