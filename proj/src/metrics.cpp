#include "nela/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <string>

#include "nela/csv.hpp"
#include "nela/errors.hpp"

namespace nela {

namespace {

constexpr const char* kLogHeader = "t,instant_regret,cum_regret,precision,recall,detected_count";

struct MeanSe {
  double mean;
  double se;
};

template <class Get>
MeanSe mean_se(const std::vector<MetricsLog>& logs, std::size_t r, Get get) {
  // Sorted summation keeps the result bit-identical under reordering of logs.
  std::vector<double> values;
  values.reserve(logs.size());
  for (const auto& log : logs) values.push_back(get(log.rounds[r]));
  std::sort(values.begin(), values.end());
  const double k = static_cast<double>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / k;
  if (values.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / (k - 1.0)) / std::sqrt(k)};
}

double fit_slope(const std::vector<std::pair<double, double>>& pts) {
  if (pts.size() < 2) return 0.0;
  double mx = 0, my = 0;
  for (const auto& [x, y] : pts) {
    mx += x;
    my += y;
  }
  mx /= static_cast<double>(pts.size());
  my /= static_cast<double>(pts.size());
  double sxy = 0, sxx = 0;
  for (const auto& [x, y] : pts) {
    sxy += (x - mx) * (y - my);
    sxx += (x - mx) * (x - mx);
  }
  return sxx > 0 ? sxy / sxx : 0.0;
}

template <class Rows, class Get>
double growth_exponent_impl(const Rows& rows, Get cum) {
  const long horizon = static_cast<long>(rows.size());
  std::vector<std::pair<double, double>> pts;
  for (const auto& row : rows) {
    if (2 * row.t < horizon || cum(row) <= 0.0) continue;
    pts.emplace_back(std::log(static_cast<double>(row.t)), std::log(cum(row)));
  }
  return fit_slope(pts);
}

}  // namespace

void MetricsLog::record(double instant_regret, const std::vector<int>& detected,
                        const std::vector<int>& truth) {
  RoundMetrics m;
  m.t = horizon() + 1;
  m.instant_regret = instant_regret;
  m.cum_regret = (rounds.empty() ? 0.0 : rounds.back().cum_regret) + instant_regret;
  std::tie(m.precision, m.recall) = precision_recall(detected, truth);
  m.detected_count = static_cast<int>(std::set<int>(detected.begin(), detected.end()).size());
  rounds.push_back(m);
}

std::pair<double, double> precision_recall(const std::vector<int>& detected,
                                           const std::vector<int>& truth) {
  const std::set<int> det(detected.begin(), detected.end());
  const std::set<int> tru(truth.begin(), truth.end());
  std::size_t hits = 0;
  for (int u : det) hits += tru.count(u);
  const double precision = det.empty() ? 1.0 : static_cast<double>(hits) / static_cast<double>(det.size());
  const double recall = tru.empty() ? 1.0 : static_cast<double>(hits) / static_cast<double>(tru.size());
  return {precision, recall};
}

Aggregate aggregate(const std::vector<MetricsLog>& logs) {
  if (logs.empty()) throw InputError("aggregate needs at least one log");
  const long horizon = logs.front().horizon();
  for (const auto& log : logs) {
    if (log.horizon() != horizon) {
      throw InputError("cannot aggregate logs with different horizons (" +
                       std::to_string(horizon) + " vs " + std::to_string(log.horizon()) + ")");
    }
  }

  Aggregate agg;
  agg.policy = logs.front().policy;
  agg.seed_count = static_cast<int>(logs.size());
  agg.rows.resize(static_cast<std::size_t>(horizon));
  for (std::size_t r = 0; r < agg.rows.size(); ++r) {
    AggregateRow& row = agg.rows[r];
    row.t = static_cast<long>(r) + 1;
    auto set = [&](double& mean, double& se, auto get) {
      const MeanSe ms = mean_se(logs, r, get);
      mean = ms.mean;
      se = ms.se;
    };
    set(row.instant_regret_mean, row.instant_regret_se, [](const RoundMetrics& m) { return m.instant_regret; });
    set(row.cum_regret_mean, row.cum_regret_se, [](const RoundMetrics& m) { return m.cum_regret; });
    set(row.precision_mean, row.precision_se, [](const RoundMetrics& m) { return m.precision; });
    set(row.recall_mean, row.recall_se, [](const RoundMetrics& m) { return m.recall; });
    set(row.detected_count_mean, row.detected_count_se,
        [](const RoundMetrics& m) { return static_cast<double>(m.detected_count); });
  }
  return agg;
}

double growth_exponent(const MetricsLog& log) {
  return growth_exponent_impl(log.rounds, [](const RoundMetrics& m) { return m.cum_regret; });
}

double growth_exponent(const Aggregate& agg) {
  return growth_exponent_impl(agg.rows, [](const AggregateRow& m) { return m.cum_regret_mean; });
}

void write_log_csv(const std::filesystem::path& path, const MetricsLog& log) {
  std::ofstream out(path);
  if (!out) throw LoadError("cannot write " + path.string());
  out << kLogHeader << '\n';
  for (const auto& m : log.rounds) {
    out << m.t << ',' << csv::format_double(m.instant_regret) << ','
        << csv::format_double(m.cum_regret) << ',' << csv::format_double(m.precision) << ','
        << csv::format_double(m.recall) << ',' << m.detected_count << '\n';
  }
}

MetricsLog read_log_csv(const std::filesystem::path& path, std::string policy, long seed) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kLogHeader) {
    throw LoadError(path.string() + ": unexpected header '" + line + "'");
  }
  MetricsLog log;
  log.policy = std::move(policy);
  log.seed = seed;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = csv::split(line, ',');
    if (f.size() != 6) throw LoadError(path.string() + ": line " + std::to_string(line_no) + " malformed");
    try {
      RoundMetrics m;
      m.t = std::stol(f[0]);
      m.instant_regret = std::stod(f[1]);
      m.cum_regret = std::stod(f[2]);
      m.precision = std::stod(f[3]);
      m.recall = std::stod(f[4]);
      m.detected_count = std::stoi(f[5]);
      log.rounds.push_back(m);
    } catch (const std::exception&) {
      throw LoadError(path.string() + ": line " + std::to_string(line_no) + " malformed");
    }
  }
  return log;
}

void write_aggregate_csv(const std::filesystem::path& path, const Aggregate& agg) {
  std::ofstream out(path);
  if (!out) throw LoadError("cannot write " + path.string());
  out << "policy,t";
  for (const char* name : {"instant_regret", "cum_regret", "precision", "recall", "detected_count"})
    out << ',' << name << "_mean," << name << "_se";
  out << '\n';
  auto f = [](double v) { return csv::format_double(v); };
  for (const auto& r : agg.rows) {
    out << agg.policy << ',' << r.t << ',' << f(r.instant_regret_mean) << ',' << f(r.instant_regret_se)
        << ',' << f(r.cum_regret_mean) << ',' << f(r.cum_regret_se) << ',' << f(r.precision_mean)
        << ',' << f(r.precision_se) << ',' << f(r.recall_mean) << ',' << f(r.recall_se) << ','
        << f(r.detected_count_mean) << ',' << f(r.detected_count_se) << '\n';
  }
}

}  // namespace nela
