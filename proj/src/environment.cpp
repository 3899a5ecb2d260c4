#include "nela/environment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "nela/csv.hpp"
#include "nela/errors.hpp"

namespace nela {

bool GroundTruth::is_anomalous(int user) const {
  return std::binary_search(anomalies.begin(), anomalies.end(), user);
}

Eigen::MatrixXd GroundTruth::payoff_parameters(const InfluenceMatrix& w) const {
  if (w.n() != n()) throw InputError("influence matrix size does not match user count");
  return theta * w.matrix() + v;
}

std::vector<int> sample_without_replacement(int k, int n, Rng& rng) {
  if (k < 0 || k > n) throw InputError("cannot draw " + std::to_string(k) + " of " + std::to_string(n));
  std::vector<int> pool(static_cast<std::size_t>(n));
  std::iota(pool.begin(), pool.end(), 0);
  for (int i = 0; i < k; ++i) {
    std::uniform_int_distribution<int> pick(i, n - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }
  pool.resize(static_cast<std::size_t>(k));
  return pool;
}

namespace {

void plant_anomalies(GroundTruth& gt, int anomaly_count, double gamma_target, int nonzero_dims,
                     Rng& rng) {
  const int n = gt.n();
  const int d = gt.d();
  if (anomaly_count < 0 || anomaly_count > n) {
    throw InputError("anomaly count must lie in [0, n]");
  }
  if (anomaly_count > 0 && (nonzero_dims < 1 || nonzero_dims > d)) {
    throw InputError("nonzero_dims must lie in [1, d] when anomalies are requested");
  }
  if (gamma_target < 0.0) throw InputError("gamma_target must be >= 0");

  gt.v = Eigen::MatrixXd::Zero(d, n);
  gt.anomalies = sample_without_replacement(anomaly_count, n, rng);
  std::uniform_real_distribution<double> uniform(-10.0, 10.0);
  for (int user : gt.anomalies) {
    for (int k : sample_without_replacement(nonzero_dims, d, rng)) {
      double value = uniform(rng);
      while (value == 0.0) value = uniform(rng);
      gt.v(k, user) = value;
    }
    if (gamma_target > 0.0) gt.v.col(user) *= gamma_target / gt.v.col(user).norm();
  }
  std::sort(gt.anomalies.begin(), gt.anomalies.end());

  if (gt.anomalies.empty()) {
    gt.gamma = 0.0;
  } else if (gamma_target > 0.0) {
    gt.gamma = gamma_target;
  } else {
    gt.gamma = std::numeric_limits<double>::infinity();
    for (int user : gt.anomalies) gt.gamma = std::min(gt.gamma, gt.v.col(user).norm());
  }
}

}  // namespace

GroundTruth generate_ground_truth(int n, int d, int anomaly_count, double gamma_target,
                                  int nonzero_dims, Rng& rng) {
  if (n < 1 || d < 1) throw InputError("n and d must be >= 1");
  GroundTruth gt;
  gt.theta.resize(d, n);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int j = 0; j < n; ++j) {
    double norm = 0.0;
    while (norm == 0.0) {
      for (int k = 0; k < d; ++k) gt.theta(k, j) = normal(rng);
      norm = gt.theta.col(j).norm();
    }
    gt.theta.col(j) /= norm;
  }
  plant_anomalies(gt, anomaly_count, gamma_target, nonzero_dims, rng);
  return gt;
}

GroundTruth ground_truth_from_features(Eigen::MatrixXd theta, int anomaly_count,
                                       double gamma_target, int nonzero_dims, Rng& rng) {
  GroundTruth gt;
  gt.theta = std::move(theta);
  plant_anomalies(gt, anomaly_count, gamma_target, nonzero_dims, rng);
  return gt;
}

int sample_user(int n, Rng& rng) {
  std::uniform_int_distribution<int> pick(0, n - 1);
  return pick(rng);
}

Eigen::MatrixXd sample_raw_arms(int arm_count, int d, double arm_correlation, Rng& rng) {
  if (arm_count < 1 || d < 1) throw InputError("arm count and dimension must be >= 1");
  if (!(arm_correlation >= 0.0 && arm_correlation < 1.0)) {
    throw InputError("arm correlation must lie in [0, 1)");
  }
  const double shared = std::sqrt(arm_correlation);
  const double own = std::sqrt(1.0 - arm_correlation);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd x(d, arm_count);
  for (int k = 0; k < d; ++k) {
    const double common = normal(rng);
    for (int m = 0; m < arm_count; ++m) x(k, m) = shared * common + own * normal(rng);
  }
  return x;
}

ArmSet sample_arm_set(int arm_count, int d, double arm_correlation, Rng& rng) {
  ArmSet set{sample_raw_arms(arm_count, d, arm_correlation, rng)};
  for (int m = 0; m < set.size(); ++m) {
    const double norm = set.arms.col(m).norm();
    if (norm > 1.0) set.arms.col(m) /= norm;
  }
  return set;
}

ArmSet sample_catalog_arms(const Eigen::MatrixXd& catalog, int arm_count, Rng& rng) {
  const auto picks = sample_without_replacement(arm_count, static_cast<int>(catalog.cols()), rng);
  ArmSet set{Eigen::MatrixXd(catalog.rows(), arm_count)};
  for (int m = 0; m < arm_count; ++m) set.arms.col(m) = catalog.col(picks[m]);
  return set;
}

double expected_reward(const GroundTruth& gt, const InfluenceMatrix& w, int user,
                       const Eigen::Ref<const Eigen::VectorXd>& arm) {
  const Eigen::VectorXd column = gt.theta * w.matrix().col(user) + gt.v.col(user);
  return arm.dot(column);
}

RoundRecord play_round(const Eigen::MatrixXd& payoff_params, const ArmSet& arm_set, int user,
                       int chosen_arm, double sigma, Rng& rng) {
  if (chosen_arm < 0 || chosen_arm >= arm_set.size()) {
    throw InputError("chosen arm index out of range");
  }
  RoundRecord rec;
  rec.user = user;
  rec.arm_set = arm_set;
  rec.chosen_arm = chosen_arm;

  const Eigen::VectorXd means = arm_set.arms.transpose() * payoff_params.col(user);
  rec.expected_reward = means(chosen_arm);
  rec.optimal_reward = means.maxCoeff();
  rec.instant_regret = std::max(0.0, rec.optimal_reward - rec.expected_reward);

  std::normal_distribution<double> normal(0.0, 1.0);
  rec.reward = rec.expected_reward + sigma * normal(rng);
  return rec;
}

RoundRecord play_round(const GroundTruth& gt, const InfluenceMatrix& w, const ArmSet& arm_set,
                       int user, int chosen_arm, double sigma, Rng& rng) {
  return play_round(gt.payoff_parameters(w), arm_set, user, chosen_arm, sigma, rng);
}

void export_ground_truth(const std::filesystem::path& dir, const GroundTruth& gt) {
  std::filesystem::create_directories(dir);
  csv::write_matrix(dir / "theta.csv", gt.theta);
  csv::write_matrix(dir / "v.csv", gt.v);
  csv::write_int_column(dir / "anomalies.csv", gt.anomalies);
}

GroundTruth import_ground_truth(const std::filesystem::path& dir) {
  GroundTruth gt;
  gt.theta = csv::read_matrix(dir / "theta.csv");
  gt.v = csv::read_matrix(dir / "v.csv");
  gt.anomalies = csv::read_int_column(dir / "anomalies.csv");
  std::sort(gt.anomalies.begin(), gt.anomalies.end());
  if (gt.v.rows() != gt.theta.rows() || gt.v.cols() != gt.theta.cols()) {
    throw LoadError(dir.string() + ": theta.csv and v.csv dimensions differ");
  }
  for (int user : gt.anomalies) {
    if (user < 0 || user >= gt.n()) throw LoadError(dir.string() + ": anomaly id out of range");
  }
  for (int j = 0; j < gt.n(); ++j) {
    if (!gt.is_anomalous(j) && gt.v.col(j).norm() != 0.0) {
      throw LoadError(dir.string() + ": user " + std::to_string(j) +
                      " has a residual but is not listed as an anomaly");
    }
  }
  gt.gamma = gt.anomalies.empty() ? 0.0 : std::numeric_limits<double>::infinity();
  for (int user : gt.anomalies) gt.gamma = std::min(gt.gamma, gt.v.col(user).norm());
  return gt;
}

Eigen::MatrixXd load_feature_matrix(const std::filesystem::path& path) {
  Eigen::MatrixXd m = csv::read_matrix(path);
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    const double norm = m.col(j).norm();
    if (std::abs(norm - 1.0) > 1e-6) {
      throw LoadError(path.string() + ": column " + std::to_string(j) + " has norm " +
                      csv::format_double(norm) + ", expected 1");
    }
    m.col(j) /= norm;
  }
  return m;
}

}  // namespace nela
