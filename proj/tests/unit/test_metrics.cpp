#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include <gtest/gtest.h>

#include "nela/errors.hpp"
#include "nela/metrics.hpp"

namespace nela {
namespace {

MetricsLog log_from(const std::vector<double>& regrets, long seed = 0) {
  MetricsLog log;
  log.policy = "p";
  log.seed = seed;
  for (double r : regrets) log.record(r, {}, {});
  return log;
}

TEST(PrecisionRecall, Examples) {
  EXPECT_EQ(precision_recall({3, 5}, {3, 7}), std::make_pair(0.5, 0.5));
  EXPECT_EQ(precision_recall({}, {1, 2}), std::make_pair(1.0, 0.0));
  EXPECT_EQ(precision_recall({4}, {}), std::make_pair(0.0, 1.0));
  EXPECT_EQ(precision_recall({}, {}), std::make_pair(1.0, 1.0));
  EXPECT_EQ(precision_recall({2, 1, 2}, {1, 2}), std::make_pair(1.0, 1.0));
  const auto [p, r] = precision_recall({0, 1, 2}, {2, 9});
  EXPECT_DOUBLE_EQ(p, 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(r, 0.5);
}

TEST(Log, CumulativeRegretIsExactRunningSum) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  std::vector<double> regrets(500);
  for (auto& r : regrets) r = u(rng);
  const auto log = log_from(regrets);
  double sum = 0.0;
  for (std::size_t i = 0; i < regrets.size(); ++i) {
    sum += regrets[i];
    EXPECT_EQ(log.rounds[i].cum_regret, sum);
    EXPECT_EQ(log.rounds[i].t, static_cast<long>(i) + 1);
  }
  EXPECT_EQ(log.final_cum_regret(), sum);
}

TEST(Log, DetectionColumns) {
  MetricsLog log;
  log.record(0.0, {1, 4}, {1, 2});
  EXPECT_EQ(log.rounds[0].detected_count, 2);
  EXPECT_DOUBLE_EQ(log.rounds[0].precision, 0.5);
  EXPECT_DOUBLE_EQ(log.rounds[0].recall, 0.5);
}

TEST(Aggregate, SingleLogIsIdentity) {
  const auto log = log_from({0.5, 1.5, 0.25});
  const auto agg = aggregate({log});
  ASSERT_EQ(agg.rows.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(agg.rows[i].cum_regret_mean, log.rounds[i].cum_regret);
    EXPECT_EQ(agg.rows[i].cum_regret_se, 0.0);
  }
  EXPECT_EQ(agg.seed_count, 1);
}

TEST(Aggregate, TwoLogsMeanAndStandardError) {
  // Values {1, 3}: mean 2, sample sd sqrt(2), standard error sqrt(2)/sqrt(2) = 1.
  const auto agg = aggregate({log_from({1.0}), log_from({3.0})});
  EXPECT_DOUBLE_EQ(agg.rows[0].instant_regret_mean, 2.0);
  EXPECT_DOUBLE_EQ(agg.rows[0].instant_regret_se, 1.0);
}

TEST(Aggregate, PermutationInvariant) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<MetricsLog> logs;
  for (int s = 0; s < 7; ++s) {
    std::vector<double> r(50);
    for (auto& x : r) x = u(rng);
    logs.push_back(log_from(r, s));
  }
  const auto a = aggregate(logs);
  std::reverse(logs.begin(), logs.end());
  std::swap(logs[1], logs[4]);
  const auto b = aggregate(logs);
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    EXPECT_EQ(a.rows[i].cum_regret_mean, b.rows[i].cum_regret_mean);
    EXPECT_EQ(a.rows[i].cum_regret_se, b.rows[i].cum_regret_se);
  }
}

TEST(Aggregate, RejectsMismatchedHorizons) {
  EXPECT_THROW(aggregate({log_from({1.0}), log_from({1.0, 2.0})}), InputError);
  EXPECT_THROW(aggregate({}), InputError);
}

TEST(Growth, PowerLawExponents) {
  for (double p : {0.5, 0.75, 1.0}) {
    MetricsLog log;
    double prev = 0.0;
    for (long t = 1; t <= 2000; ++t) {
      const double cum = std::pow(static_cast<double>(t), p);
      log.record(cum - prev, {}, {});
      prev = cum;
    }
    EXPECT_NEAR(growth_exponent(log), p, 1e-9) << p;
    EXPECT_NEAR(growth_exponent(aggregate({log})), p, 1e-9);
  }
  EXPECT_EQ(growth_exponent(log_from({0.0, 0.0, 0.0})), 0.0);
}

TEST(Csv, LogRoundTripAndHeaders) {
  MetricsLog log = log_from({0.1, 0.2, 0.30000000000000004});
  log.rounds[1].precision = 0.5;
  const auto dir = std::filesystem::temp_directory_path() / "nela_metrics_csv";
  std::filesystem::create_directories(dir);
  write_log_csv(dir / "log.csv", log);
  const auto back = read_log_csv(dir / "log.csv", "p", 0);
  ASSERT_EQ(back.rounds.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(back.rounds[i].cum_regret, log.rounds[i].cum_regret);
    EXPECT_EQ(back.rounds[i].precision, log.rounds[i].precision);
  }

  write_aggregate_csv(dir / "agg.csv", aggregate({log, log}));
  std::ifstream in(dir / "agg.csv");
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header,
            "policy,t,instant_regret_mean,instant_regret_se,cum_regret_mean,cum_regret_se,"
            "precision_mean,precision_se,recall_mean,recall_se,detected_count_mean,"
            "detected_count_se");

  std::ofstream(dir / "bad.csv") << "t,regret\n1,0\n";
  EXPECT_THROW(read_log_csv(dir / "bad.csv", "p", 0), LoadError);
}

}  // namespace
}  // namespace nela
