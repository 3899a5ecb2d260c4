#include "nela/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iostream>
#include <map>
#include <regex>
#include <sstream>
#include <thread>

#include "nela/csv.hpp"
#include "nela/errors.hpp"
#include "nela/nela_policy.hpp"
#include "nela/version.hpp"

namespace nela {

namespace {

enum Stream : std::uint32_t { kThetaStream = 0, kEnvironmentStream = 1, kAnomalyStream = 2 };

Rng seeded_rng(long seed, Stream stream) {
  const auto s = static_cast<std::uint64_t>(seed);
  std::seed_seq seq{static_cast<std::uint32_t>(s & 0xffffffffu),
                    static_cast<std::uint32_t>(s >> 32), static_cast<std::uint32_t>(stream)};
  return Rng(seq);
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  for (const auto& item : csv::split(value, ',')) {
    const std::string t = trim(item);
    if (!t.empty()) out.push_back(t);
  }
  return out;
}

template <class T>
T parse_number(const std::string& key, const std::string& value) {
  std::istringstream in(trim(value));
  T out{};
  in >> out;
  if (in.fail() || !in.eof()) throw InputError("invalid value for " + key + ": '" + value + "'");
  return out;
}

template <class T>
std::vector<T> parse_number_list(const std::string& key, const std::string& value) {
  std::vector<T> out;
  for (const auto& item : split_list(value)) out.push_back(parse_number<T>(key, item));
  if (out.empty()) throw InputError(key + " needs at least one value");
  return out;
}

// Accepts "1,2,5" as well as inclusive ranges such as "1..10".
std::vector<long> parse_seed_list(const std::string& key, const std::string& value) {
  std::vector<long> out;
  for (const auto& item : split_list(value)) {
    const auto dots = item.find("..");
    if (dots == std::string::npos) {
      out.push_back(parse_number<long>(key, item));
      continue;
    }
    const long lo = parse_number<long>(key, item.substr(0, dots));
    const long hi = parse_number<long>(key, item.substr(dots + 2));
    if (hi < lo) throw InputError("empty seed range '" + item + "'");
    for (long s = lo; s <= hi; ++s) out.push_back(s);
  }
  if (out.empty()) throw InputError(key + " needs at least one value");
  return out;
}

double effective_gamma(const ExperimentConfig& c) { return c.gammas.front(); }
int effective_dims(const ExperimentConfig& c) { return c.nonzero_dims.front(); }

void log_progress(const ExperimentConfig& config, const std::string& msg) {
  if (config.verbose) std::cerr << "[nela] " << msg << '\n';
}

}  // namespace

Scenario parse_scenario(const std::string& s) {
  if (s == "toy-star") return Scenario::ToyStar;
  if (s == "toy-full") return Scenario::ToyFull;
  if (s == "synthetic") return Scenario::Synthetic;
  if (s == "sweep") return Scenario::Sweep;
  if (s == "replay") return Scenario::Replay;
  throw InputError("unknown scenario '" + s + "'");
}

std::string to_string(Scenario s) {
  switch (s) {
    case Scenario::ToyStar: return "toy-star";
    case Scenario::ToyFull: return "toy-full";
    case Scenario::Synthetic: return "synthetic";
    case Scenario::Sweep: return "sweep";
    case Scenario::Replay: return "replay";
  }
  return "synthetic";
}

void ExperimentConfig::validate() const {
  if (horizon < 1) throw InputError("horizon must be >= 1");
  if (n < 1 || d < 1) throw InputError("n and d must be >= 1");
  if (n * d < 2) throw InputError("n * d must be >= 2");
  if (arms < 1) throw InputError("arms must be >= 1");
  if (seeds.empty()) throw InputError("at least one seed is required");
  if (policies.empty()) throw InputError("at least one policy is required");
  for (const auto& p : policies) {
    if (std::find(known_policies().begin(), known_policies().end(), p) == known_policies().end()) {
      throw InputError("unknown policy '" + p + "'");
    }
  }
  if (gammas.empty() || nonzero_dims.empty()) throw InputError("gamma and nonzero-dims need values");
  for (double g : gammas)
    if (!(g >= 0.0)) throw InputError("gamma must be >= 0");
  for (int k : nonzero_dims)
    if (k < 1 || k > d) throw InputError("nonzero-dims must lie in [1, d]");
  if (scenario != Scenario::Sweep && (gammas.size() != 1 || nonzero_dims.size() != 1)) {
    throw InputError("gamma and nonzero-dims lists are only allowed in sweeps");
  }
  if (anomalies < 0 || anomalies > n) throw InputError("anomalies must lie in [0, n]");
  if (!(keep_fraction > 0.0 && keep_fraction <= 1.0)) throw InputError("keep-fraction must lie in (0, 1]");
  if (!(arm_correlation >= 0.0 && arm_correlation < 1.0)) throw InputError("arm-correlation must lie in [0, 1)");
  if (!(sigma >= 0.0)) throw InputError("sigma must be >= 0");
  if (!(delta > 0.0 && delta <= 1.0)) throw InputError("delta must lie in (0, 1]");
  if (!(lambda1 > 0.0) || !(lambda0 >= 0.0)) throw InputError("lambda1 must be > 0 and lambda0 >= 0");
  if (lasso_every < 1) throw InputError("lasso-every must be >= 1");
  if (scenario == Scenario::Replay && user_features.empty()) {
    throw InputError("replay needs user-features");
  }
}

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json j{
      {"scenario", to_string(scenario)},
      {"n", n},
      {"d", d},
      {"arms", arms},
      {"horizon", horizon},
      {"sigma", sigma},
      {"delta", delta},
      {"lambda0", lambda0},
      {"lambda1", lambda1},
      {"gamma", gammas},
      {"nonzero_dims", nonzero_dims},
      {"anomalies", anomalies},
      {"keep_fraction", keep_fraction},
      {"arm_correlation", arm_correlation},
      {"policies", policies},
      {"seeds", seeds},
      {"lasso_every", lasso_every},
      {"warmup", warmup},
      {"s_x", s_x},
      {"s_theta", s_theta},
      {"graph_epsilon", graph_epsilon},
      {"refresh_targets", refresh_targets},
      {"user_features", user_features.string()},
      {"item_features", item_features.string()},
  };
  j["s_v"] = s_v ? nlohmann::json(*s_v) : nlohmann::json(nullptr);
  return j;
}

void apply_setting(ExperimentConfig& c, const std::string& raw_key, const std::string& value) {
  std::string key = trim(raw_key);
  std::replace(key.begin(), key.end(), '_', '-');
  if (key == "scenario") c.scenario = parse_scenario(trim(value));
  else if (key == "n") c.n = parse_number<int>(key, value);
  else if (key == "d") c.d = parse_number<int>(key, value);
  else if (key == "arms") c.arms = parse_number<int>(key, value);
  else if (key == "horizon") c.horizon = parse_number<long>(key, value);
  else if (key == "sigma") c.sigma = parse_number<double>(key, value);
  else if (key == "delta") c.delta = parse_number<double>(key, value);
  else if (key == "lambda0") c.lambda0 = parse_number<double>(key, value);
  else if (key == "lambda1") c.lambda1 = parse_number<double>(key, value);
  else if (key == "gamma") c.gammas = parse_number_list<double>(key, value);
  else if (key == "nonzero-dims") c.nonzero_dims = parse_number_list<int>(key, value);
  else if (key == "anomalies") c.anomalies = parse_number<int>(key, value);
  else if (key == "keep-fraction") c.keep_fraction = parse_number<double>(key, value);
  else if (key == "arm-correlation") c.arm_correlation = parse_number<double>(key, value);
  else if (key == "policies") {
    c.policies = split_list(value);
  } else if (key == "seeds") c.seeds = parse_seed_list(key, value);
  else if (key == "out") c.out_dir = trim(value);
  else if (key == "lasso-every") c.lasso_every = parse_number<long>(key, value);
  else if (key == "warmup") c.warmup = parse_number<long>(key, value);
  else if (key == "s-x") c.s_x = parse_number<double>(key, value);
  else if (key == "s-v") c.s_v = parse_number<double>(key, value);
  else if (key == "s-theta") c.s_theta = parse_number<double>(key, value);
  else if (key == "graph-epsilon") c.graph_epsilon = parse_number<double>(key, value);
  else if (key == "user-features") c.user_features = trim(value);
  else if (key == "item-features") c.item_features = trim(value);
  else if (key == "refresh-targets") c.refresh_targets = parse_number<int>(key, value) != 0;
  else if (key == "workers") c.workers = parse_number<int>(key, value);
  else throw InputError("unknown setting '" + raw_key + "'");
}

void apply_config_text(ExperimentConfig& config, const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw InputError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    apply_setting(config, line.substr(0, eq), line.substr(eq + 1));
  }
}

void apply_config_file(ExperimentConfig& config, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  apply_config_text(config, buf.str());
}

Instance make_instance(const ExperimentConfig& config, long seed) {
  Rng theta_rng = seeded_rng(seed, kThetaStream);
  Rng anomaly_rng = seeded_rng(seed, kAnomalyStream);
  const double gamma = effective_gamma(config);
  const int dims = effective_dims(config);

  Instance inst;
  switch (config.scenario) {
    case Scenario::ToyStar:
    case Scenario::ToyFull: {
      Eigen::MatrixXd theta = generate_ground_truth(config.n, config.d, 0, 0.0, 1, theta_rng).theta;
      // The toy world has a single anomaly on user 0, present only for gamma > 0.
      inst.truth = ground_truth_from_features(std::move(theta), gamma > 0.0 ? 1 : 0, gamma, dims,
                                              anomaly_rng);
      if (!inst.truth.anomalies.empty() && inst.truth.anomalies.front() != 0) {
        inst.truth.v.col(0).swap(inst.truth.v.col(inst.truth.anomalies.front()));
        inst.truth.anomalies = {0};
      }
      const auto edges = config.scenario == Scenario::ToyStar ? star_edges(config.n, 0)
                                                              : complete_edges(config.n);
      inst.graph = build_uniform_graph(edges, config.n);
      break;
    }
    case Scenario::Synthetic:
    case Scenario::Sweep: {
      Eigen::MatrixXd theta = generate_ground_truth(config.n, config.d, 0, 0.0, 1, theta_rng).theta;
      inst.truth = ground_truth_from_features(std::move(theta), config.anomalies, gamma, dims, anomaly_rng);
      inst.graph = build_similarity_graph(inst.truth.theta, config.keep_fraction);
      break;
    }
    case Scenario::Replay: {
      Eigen::MatrixXd theta = load_feature_matrix(config.user_features);
      if (theta.rows() != config.d || theta.cols() != config.n) {
        throw InputError("user features are " + std::to_string(theta.rows()) + "x" +
                         std::to_string(theta.cols()) + ", expected d x n = " +
                         std::to_string(config.d) + "x" + std::to_string(config.n));
      }
      inst.truth = ground_truth_from_features(std::move(theta), config.anomalies, gamma, dims, anomaly_rng);
      inst.graph = build_similarity_graph(inst.truth.theta, config.keep_fraction);
      if (!config.item_features.empty()) {
        Eigen::MatrixXd items = load_feature_matrix(config.item_features);
        if (items.rows() != config.d) {
          throw InputError("item features have dimension " + std::to_string(items.rows()) +
                           ", user features have " + std::to_string(config.d));
        }
        if (items.cols() < config.arms) {
          throw InputError("item catalog has fewer items than arms per round");
        }
        inst.catalog = std::move(items);
      }
      break;
    }
  }
  return inst;
}

std::unique_ptr<Policy> make_policy(const std::string& name, const ExperimentConfig& config,
                                    const Instance& instance) {
  RidgeConfig ridge;
  ridge.lambda1 = config.lambda1;
  ridge.sigma = config.sigma;
  ridge.delta = config.delta;
  ridge.s_theta = config.s_theta;

  if (name == "nela") {
    NelaConfig nc;
    nc.lambda1 = config.lambda1;
    nc.lambda0 = config.lambda0;
    nc.sigma = config.sigma;
    nc.delta = config.delta;
    nc.s_x = config.s_x;
    nc.s_theta = config.s_theta;
    nc.s_v = config.s_v ? *config.s_v
                        : default_residual_bound(static_cast<int>(instance.truth.anomalies.size()));
    nc.warmup_rounds = config.warmup;
    nc.lasso_every = config.lasso_every;
    nc.refresh_targets = config.refresh_targets;
    return std::make_unique<NelaPolicy>(instance.graph, config.d, nc, "nela");
  }
  if (name == "colin") return make_colin_policy(instance.graph, config.d, ridge);
  if (name == "graphucb") {
    return std::make_unique<GraphUcbPolicy>(instance.graph, config.d, ridge, config.graph_epsilon);
  }
  if (name == "nlinucb") return std::make_unique<NLinUcbPolicy>(config.n, config.d, ridge);
  if (name == "linucb") return std::make_unique<LinUcbPolicy>(config.n, config.d, ridge);
  throw InputError("unknown policy '" + name + "'");
}

MetricsLog run_single(const ExperimentConfig& config, const Instance& instance,
                      const std::string& policy_name, long seed) {
  auto policy = make_policy(policy_name, config, instance);
  Rng env = seeded_rng(seed, kEnvironmentStream);
  const Eigen::MatrixXd payoff = instance.truth.payoff_parameters(instance.graph);

  MetricsLog log;
  log.policy = policy_name;
  log.seed = seed;
  log.rounds.reserve(static_cast<std::size_t>(config.horizon));
  for (long t = 1; t <= config.horizon; ++t) {
    const int user = sample_user(config.n, env);
    const ArmSet arms = instance.catalog
                            ? sample_catalog_arms(*instance.catalog, config.arms, env)
                            : sample_arm_set(config.arms, config.d, config.arm_correlation, env);
    const int chosen = policy->select(user, arms);
    const RoundRecord rec = play_round(payoff, arms, user, chosen, config.sigma, env);
    policy->update(user, arms.arm(chosen), rec.reward);
    log.record(rec.instant_regret, policy->detected_anomalies(), instance.truth.anomalies);
  }
  return log;
}

const Aggregate& ExperimentResult::aggregate_for(const std::string& policy) const {
  for (const auto& a : aggregates)
    if (a.policy == policy) return a;
  throw InputError("no aggregate for policy '" + policy + "'");
}

int resolve_worker_count(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("NELA_WORKERS")) {
    const int w = std::atoi(env);
    if (w > 0) return w;
  }
  return 1;
}

std::string config_hash(const ExperimentConfig& config) {
  const std::string text = config.to_json().dump();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  std::ostringstream out;
  out << std::hex << h;
  return out.str();
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  if (config.scenario == Scenario::Sweep &&
      (config.gammas.size() != 1 || config.nonzero_dims.size() != 1)) {
    throw InputError("run_sweep handles gamma lists");
  }
  const auto started = std::chrono::steady_clock::now();

  std::vector<Instance> instances;
  instances.reserve(config.seeds.size());
  for (long seed : config.seeds) instances.push_back(make_instance(config, seed));

  struct Job {
    std::size_t policy;
    std::size_t seed;
  };
  std::vector<Job> jobs;
  for (std::size_t p = 0; p < config.policies.size(); ++p)
    for (std::size_t s = 0; s < config.seeds.size(); ++s) jobs.push_back({p, s});

  ExperimentResult result;
  result.logs.resize(jobs.size());
  std::vector<double> seconds(jobs.size(), 0.0);
  std::vector<std::exception_ptr> errors(jobs.size());
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      const auto& job = jobs[i];
      const auto t0 = std::chrono::steady_clock::now();
      try {
        result.logs[i] = run_single(config, instances[job.seed], config.policies[job.policy],
                                    config.seeds[job.seed]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
      seconds[i] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      log_progress(config, config.policies[job.policy] + " seed " +
                               std::to_string(config.seeds[job.seed]) + " finished in " +
                               csv::format_double(std::round(seconds[i] * 100) / 100) + " s");
    }
  };
  const int workers = std::min<int>(resolve_worker_count(config.workers), static_cast<int>(jobs.size()));
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  nlohmann::json per_policy = nlohmann::json::object();
  for (std::size_t p = 0; p < config.policies.size(); ++p) {
    std::vector<MetricsLog> logs(result.logs.begin() + static_cast<long>(p * config.seeds.size()),
                                 result.logs.begin() + static_cast<long>((p + 1) * config.seeds.size()));
    Aggregate agg = aggregate(logs);
    double wall = 0.0;
    for (std::size_t s = 0; s < config.seeds.size(); ++s) wall += seconds[p * config.seeds.size() + s];
    const auto& last = agg.rows.back();
    per_policy[config.policies[p]] = {
        {"final_cum_regret", last.cum_regret_mean},
        {"final_cum_regret_se", last.cum_regret_se},
        {"final_precision", last.precision_mean},
        {"final_recall", last.recall_mean},
        {"growth_exponent", growth_exponent(agg)},
        {"wall_clock_seconds", wall},
    };
    result.aggregates.push_back(std::move(agg));
  }
  result.summary = {
      {"scenario", to_string(config.scenario)},
      {"horizon", config.horizon},
      {"seeds", config.seeds},
      {"policies", per_policy},
      {"wall_clock_seconds",
       std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count()},
  };

  if (!config.out_dir.empty()) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(config.out_dir / "logs", ec);
    if (ec) throw LoadError("cannot create output directory " + config.out_dir.string() + ": " + ec.message());
    for (const auto& log : result.logs) {
      write_log_csv(config.out_dir / "logs" / (log.policy + "_seed" + std::to_string(log.seed) + ".csv"), log);
    }
    for (const auto& agg : result.aggregates) {
      write_aggregate_csv(config.out_dir / ("aggregate_" + agg.policy + ".csv"), agg);
    }
    std::ofstream(config.out_dir / "summary.json") << result.summary.dump(2) << '\n';
    nlohmann::json manifest{
        {"config", config.to_json()},
        {"config_hash", config_hash(config)},
        {"seeds", config.seeds},
        {"rng", "mt19937_64 seeded by seed_seq{seed_lo, seed_hi, stream}; streams: theta=0, "
                "environment=1, anomalies=2"},
        {"versions", {{"nela", kVersion}, {"eigen", kEigenVersion}, {"compiler", kCompiler}}},
    };
    std::ofstream out(config.out_dir / "manifest.json");
    if (!out) throw LoadError("cannot write manifest in " + config.out_dir.string());
    out << manifest.dump(2) << '\n';
  }
  return result;
}

std::vector<SweepCell> run_sweep(const ExperimentConfig& config) {
  config.validate();
  std::vector<SweepCell> cells;
  for (double g : config.gammas) {
    for (int k : config.nonzero_dims) {
      ExperimentConfig cell = config;
      cell.gammas = {g};
      cell.nonzero_dims = {k};
      if (!config.out_dir.empty()) {
        cell.out_dir = config.out_dir / ("gamma_" + csv::format_double(g) + "_dims_" + std::to_string(k));
      }
      log_progress(config, "sweep cell gamma=" + csv::format_double(g) + " dims=" + std::to_string(k));
      cells.push_back({g, k, run_experiment(cell)});
    }
  }
  return cells;
}

ExperimentResult run_replay(const ExperimentConfig& config) {
  ExperimentConfig c = config;
  c.scenario = Scenario::Replay;
  return run_experiment(c);
}

std::vector<Aggregate> reaggregate_directory(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  const fs::path logs_dir = dir / "logs";
  if (!fs::is_directory(logs_dir)) throw InputError("no logs directory in " + dir.string());
  static const std::regex name_re(R"(([A-Za-z0-9]+)_seed(-?[0-9]+)\.csv)");
  std::map<std::string, std::map<long, fs::path>> found;
  for (const auto& entry : fs::directory_iterator(logs_dir)) {
    std::smatch m;
    const std::string file = entry.path().filename().string();
    if (std::regex_match(file, m, name_re)) found[m[1]][std::stol(m[2])] = entry.path();
  }
  if (found.empty()) throw InputError("no per-seed logs in " + logs_dir.string());

  std::vector<Aggregate> out;
  for (const auto& [policy, by_seed] : found) {
    std::vector<MetricsLog> logs;
    for (const auto& [seed, path] : by_seed) logs.push_back(read_log_csv(path, policy, seed));
    Aggregate agg = aggregate(logs);
    write_aggregate_csv(dir / ("aggregate_" + policy + ".csv"), agg);
    out.push_back(std::move(agg));
  }
  return out;
}

}  // namespace nela
