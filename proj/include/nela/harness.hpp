#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "nela/baselines.hpp"
#include "nela/environment.hpp"
#include "nela/graph.hpp"
#include "nela/metrics.hpp"
#include "nela/policy.hpp"

namespace nela {

enum class Scenario { ToyStar, ToyFull, Synthetic, Sweep, Replay };

Scenario parse_scenario(const std::string& s);
std::string to_string(Scenario s);

inline const std::vector<std::string>& known_policies() {
  static const std::vector<std::string> names{"nela", "colin", "graphucb", "nlinucb", "linucb"};
  return names;
}

struct ExperimentConfig {
  Scenario scenario = Scenario::Synthetic;
  int n = 50;
  int d = 10;
  int arms = 50;
  long horizon = 1000;
  double sigma = 0.01;
  double delta = 0.001;
  double lambda0 = 0.02;
  double lambda1 = 1.0;
  /// Anomaly level. One entry except in sweeps; 0 selects raw U(-10, 10)
  /// residual draws (synthetic, replay) or no anomaly at all (toy).
  std::vector<double> gammas{0.0};
  std::vector<int> nonzero_dims{1};
  int anomalies = 3;
  double keep_fraction = 0.3;
  double arm_correlation = 0.7;
  std::vector<std::string> policies = known_policies();
  std::vector<long> seeds{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  std::filesystem::path out_dir;
  long lasso_every = 1;
  long warmup = -1;  ///< negative: 10 * ceil(log(nd))
  double s_x = 1.0;
  std::optional<double> s_v;  ///< unset: 10 * sqrt(anomalies)
  double s_theta = 1.0;
  double graph_epsilon = 0.01;
  bool refresh_targets = false;
  std::filesystem::path user_features;
  std::filesystem::path item_features;
  int workers = 0;  ///< 0: NELA_WORKERS environment variable, else 1
  bool verbose = false;

  /// Throws InputError describing the first invalid field.
  void validate() const;
  nlohmann::json to_json() const;
};

/// Applies one `key = value` setting (keys match the long CLI flags without
/// the leading dashes). Throws InputError for unknown keys or bad values.
void apply_setting(ExperimentConfig& config, const std::string& key, const std::string& value);

/// Flat `key = value` text, `#` starts a comment.
void apply_config_text(ExperimentConfig& config, const std::string& text);
void apply_config_file(ExperimentConfig& config, const std::filesystem::path& path);

/// A fully specified simulated world for one seed.
struct Instance {
  GroundTruth truth;
  InfluenceMatrix graph = InfluenceMatrix::identity(1);
  std::optional<Eigen::MatrixXd> catalog;  ///< replay item features
};

/// Deterministic in (config, seed). Only single-valued gamma/nonzero-dims
/// configurations are accepted.
Instance make_instance(const ExperimentConfig& config, long seed);

std::unique_ptr<Policy> make_policy(const std::string& name, const ExperimentConfig& config,
                                    const Instance& instance);

/// Runs one policy against one seeded instance. The environment stream
/// depends on the seed only, so every policy sees the same users, arm sets
/// and noise.
MetricsLog run_single(const ExperimentConfig& config, const Instance& instance,
                      const std::string& policy, long seed);

struct ExperimentResult {
  std::vector<MetricsLog> logs;  ///< ordered by (policy, seed) as configured
  std::vector<Aggregate> aggregates;  ///< one per policy
  nlohmann::json summary;

  const Aggregate& aggregate_for(const std::string& policy) const;
};

/// All (policy, seed) runs on a worker pool, then aggregation. When out_dir is
/// set, writes logs/<policy>_seed<seed>.csv, aggregate_<policy>.csv,
/// summary.json and manifest.json.
ExperimentResult run_experiment(const ExperimentConfig& config);

struct SweepCell {
  double gamma;
  int nonzero_dims;
  ExperimentResult result;
};

/// One experiment per (gamma, nonzero_dims) pair, written to
/// out_dir/gamma_<g>_dims_<k>/.
std::vector<SweepCell> run_sweep(const ExperimentConfig& config);

/// Replay with features from files: config.user_features (d x n) and,
/// optionally, config.item_features (d x K catalog).
ExperimentResult run_replay(const ExperimentConfig& config);

/// Re-aggregates every logs/<policy>_seed<seed>.csv found in `dir`.
std::vector<Aggregate> reaggregate_directory(const std::filesystem::path& dir);

int resolve_worker_count(int requested);

/// Stable 64-bit FNV-1a hash of the canonical config JSON.
std::string config_hash(const ExperimentConfig& config);

}  // namespace nela
