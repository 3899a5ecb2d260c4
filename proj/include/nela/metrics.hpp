#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace nela {

struct RoundMetrics {
  long t = 0;
  double instant_regret = 0.0;
  double cum_regret = 0.0;
  double precision = 1.0;
  double recall = 0.0;
  int detected_count = 0;
};

struct MetricsLog {
  std::string policy;
  long seed = 0;
  std::vector<RoundMetrics> rounds;

  /// Appends round t = rounds.size() + 1, accumulating regret.
  void record(double instant_regret, const std::vector<int>& detected,
              const std::vector<int>& truth);
  long horizon() const { return static_cast<long>(rounds.size()); }
  double final_cum_regret() const { return rounds.empty() ? 0.0 : rounds.back().cum_regret; }
};

/// (precision, recall). An empty detection set has precision 1; an empty
/// truth set has recall 1. Inputs need not be sorted.
std::pair<double, double> precision_recall(const std::vector<int>& detected,
                                           const std::vector<int>& truth);

/// Pointwise mean and standard error (sample sd / sqrt(k)) across seeds.
struct AggregateRow {
  long t = 0;
  double instant_regret_mean = 0, instant_regret_se = 0;
  double cum_regret_mean = 0, cum_regret_se = 0;
  double precision_mean = 0, precision_se = 0;
  double recall_mean = 0, recall_se = 0;
  double detected_count_mean = 0, detected_count_se = 0;
};

struct Aggregate {
  std::string policy;
  int seed_count = 0;
  std::vector<AggregateRow> rows;
};

/// Throws InputError for an empty list or mismatched horizons.
Aggregate aggregate(const std::vector<MetricsLog>& logs);

/// Least-squares slope of log(cum_regret) against log(t) over t in [T/2, T].
/// Rounds with zero cumulative regret are skipped; fewer than two usable
/// points yield 0.
double growth_exponent(const MetricsLog& log);
double growth_exponent(const Aggregate& agg);

/// `t,instant_regret,cum_regret,precision,recall,detected_count`
void write_log_csv(const std::filesystem::path& path, const MetricsLog& log);
MetricsLog read_log_csv(const std::filesystem::path& path, std::string policy, long seed);

/// `policy,t,` followed by `<metric>_mean,<metric>_se` pairs.
void write_aggregate_csv(const std::filesystem::path& path, const Aggregate& agg);

}  // namespace nela
