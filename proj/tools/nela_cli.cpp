// Command-line front end for the experiment harness.
//
//   nela toy --graph full --gamma 0 --horizon 500 --out runs/toy
//   nela synthetic --config synthetic.cfg --seeds 1,2,3
//   nela sweep --gamma 2,5,10 --nonzero-dims 1,2,3 --policies nela --out runs/sweep
//   nela replay --user-features users.csv --item-features items.csv --n 100
//   nela plot-data runs/synthetic
//
// Exit codes: 0 success, 2 validation error, 3 runtime or convergence error.

#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "nela/errors.hpp"
#include "nela/harness.hpp"

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitRuntime = 3;

// Flags that map one-to-one onto ExperimentConfig settings.
const std::vector<std::pair<std::string, std::string>> kSettingFlags{
    {"n", "number of users"},
    {"d", "feature dimension"},
    {"arms", "arms offered per round"},
    {"horizon", "rounds per run"},
    {"gamma", "anomaly level (list in sweeps); 0 = raw draws / no toy anomaly"},
    {"anomalies", "number of anomalous users"},
    {"nonzero-dims", "nonzero residual coordinates per anomaly (list in sweeps)"},
    {"policies", "comma-separated subset of nela,colin,graphucb,nlinucb,linucb"},
    {"seeds", "comma-separated seeds or ranges such as 1..10"},
    {"out", "output directory"},
    {"lasso-every", "run the Lasso every k rounds"},
    {"warmup", "rounds before the first Lasso fit (negative: default)"},
    {"sigma", "reward noise standard deviation"},
    {"delta", "confidence parameter"},
    {"lambda0", "Lasso schedule coefficient"},
    {"lambda1", "ridge weight"},
    {"keep-fraction", "fraction of similarity weights kept"},
    {"arm-correlation", "correlation between arms"},
    {"s-v", "residual norm bound used in the confidence width"},
    {"refresh-targets", "1: recompute residual targets with the latest estimate"},
    {"workers", "worker threads (default: NELA_WORKERS or 1)"},
};

struct Command {
  CLI::App* app = nullptr;
  std::string config_file;
  std::vector<std::pair<std::string, std::string>> values;
};

void add_setting_flags(Command& cmd) {
  cmd.values.reserve(kSettingFlags.size() + 3);
  cmd.app->add_option("--config", cmd.config_file, "flat key = value config file");
  for (const auto& [name, help] : kSettingFlags) {
    cmd.values.emplace_back(name, "");
    cmd.app->add_option("--" + name, cmd.values.back().second, help);
  }
}

nela::ExperimentConfig build_config(const Command& cmd, nela::ExperimentConfig base) {
  if (!cmd.config_file.empty()) nela::apply_config_file(base, cmd.config_file);
  for (const auto& [name, value] : cmd.values) {
    if (cmd.app->get_option("--" + name)->count() > 0) nela::apply_setting(base, name, value);
  }
  return base;
}

void report(const nela::ExperimentResult& result) {
  std::cout << result.summary.dump(2) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Networked contextual bandits with anomaly detection: experiment harness"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "progress and timing on stderr");

  Command toy{app.add_subcommand("toy", "four-node star or fully connected toy graph")};
  std::string graph = "full";
  toy.app->add_option("--graph", graph, "star or full")->check(CLI::IsMember({"star", "full"}));
  add_setting_flags(toy);

  Command synthetic{app.add_subcommand("synthetic", "similarity-graph synthetic population")};
  add_setting_flags(synthetic);

  Command sweep{app.add_subcommand("sweep", "gamma x nonzero-dims detection sweep")};
  add_setting_flags(sweep);

  Command replay{app.add_subcommand("replay", "replay with user/item features from CSV")};
  std::string user_features;
  std::string item_features;
  replay.app->add_option("--user-features", user_features, "d x n user feature CSV")->required();
  replay.app->add_option("--item-features", item_features, "d x K item feature CSV");
  add_setting_flags(replay);

  auto* plot_data = app.add_subcommand("plot-data", "re-aggregate existing per-seed logs");
  std::string plot_dir;
  plot_data->add_option("dir", plot_dir, "experiment output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (plot_data->parsed()) {
      for (const auto& agg : nela::reaggregate_directory(plot_dir)) {
        std::cout << agg.policy << ": " << agg.seed_count << " seeds, " << agg.rows.size()
                  << " rounds\n";
      }
      return 0;
    }

    nela::ExperimentConfig base;
    base.verbose = verbose;
    if (toy.app->parsed()) {
      base.scenario = graph == "star" ? nela::Scenario::ToyStar : nela::Scenario::ToyFull;
      base.n = 4;
      base.anomalies = 1;
      report(nela::run_experiment(build_config(toy, base)));
    } else if (synthetic.app->parsed()) {
      report(nela::run_experiment(build_config(synthetic, base)));
    } else if (sweep.app->parsed()) {
      base.scenario = nela::Scenario::Sweep;
      base.gammas = {2.0, 5.0, 10.0};
      base.nonzero_dims = {1, 2, 3};
      base.policies = {"nela"};
      const auto cells = nela::run_sweep(build_config(sweep, base));
      for (const auto& cell : cells) {
        std::cout << "gamma=" << cell.gamma << " dims=" << cell.nonzero_dims;
        for (const auto& agg : cell.result.aggregates) {
          std::cout << ' ' << agg.policy << ".recall=" << agg.rows.back().recall_mean;
        }
        std::cout << '\n';
      }
    } else if (replay.app->parsed()) {
      base.scenario = nela::Scenario::Replay;
      base.user_features = user_features;
      base.item_features = item_features;
      report(nela::run_replay(build_config(replay, base)));
    }
  } catch (const nela::InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const nela::ConvergenceError& e) {
    std::cerr << "convergence error: " << e.what() << '\n';
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return 0;
}
