#include <cstdio>
#include <future>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mbrl/harness.hpp"

namespace {

struct RunArgs {
  std::string config_file;
  std::string task, trainer, seed, budget, out;
  std::vector<std::string> sets;
};

std::vector<mbrl::ConfigOverride> collect_overrides(const RunArgs& args) {
  std::vector<mbrl::ConfigOverride> overrides;
  if (!args.task.empty()) overrides.push_back({"task", args.task});
  if (!args.trainer.empty()) overrides.push_back({"trainer", args.trainer});
  if (!args.seed.empty()) overrides.push_back({"seed", args.seed});
  if (!args.budget.empty()) overrides.push_back({"budget_n", args.budget});
  if (!args.out.empty()) overrides.push_back({"output_dir", args.out});
  for (const std::string& kv : args.sets) {
    std::size_t eq = kv.find('=');
    if (eq == std::string::npos) throw mbrl::ConfigError("--set expects key=value, got: " + kv);
    overrides.push_back({kv.substr(0, eq), kv.substr(eq + 1)});
  }
  return overrides;
}

void add_common_options(CLI::App* cmd, RunArgs& args) {
  cmd->add_option("--config", args.config_file, "config file (key = value lines)");
  cmd->add_option("--task", args.task, "task: pendulum | mountaincar");
  cmd->add_option("--trainer", args.trainer,
                  "trainer: dqn | dqn5 | dqn-mem2000 | reinforce | random | fixed | nocyber | "
                  "ensemble");
  cmd->add_option("--seed", args.seed, "master seed");
  cmd->add_option("--budget", args.budget, "real-sample budget N");
  cmd->add_option("--out", args.out, "output directory");
  cmd->add_option("--set", args.sets, "extra overrides as key=value")->take_all();
}

int run_one(const mbrl::ExperimentConfig& config) {
  mbrl::RunResult result = mbrl::run_experiment(config);
  std::printf("run finished: %ld TPE steps, %ld real samples, outputs in %s\n", result.tpe_steps,
              result.real_samples_used, result.output_dir.c_str());
  if (!result.curve.empty()) {
    std::printf("final eval mean return: %.4f\n", result.curve.back().mean_return);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"model-based RL training with an online-tuned training process"};
  app.require_subcommand(1);

  RunArgs run_args;
  CLI::App* run_cmd = app.add_subcommand("run", "run one experiment");
  add_common_options(run_cmd, run_args);

  RunArgs sweep_args;
  std::string seed_range;
  int jobs = 1;
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "run independent replicas over a seed range");
  add_common_options(sweep_cmd, sweep_args);
  sweep_cmd->add_option("--seeds", seed_range, "seed range a..b (inclusive)")->required();
  sweep_cmd->add_option("--jobs", jobs, "replicas to run concurrently");

  std::string plot_dir;
  CLI::App* plot_cmd = app.add_subcommand("plot", "render learning_curve.csv to SVG");
  plot_cmd->add_option("--in", plot_dir, "run output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) {
      auto config = mbrl::parse_config_file(run_args.config_file, collect_overrides(run_args));
      return run_one(config);
    }
    if (sweep_cmd->parsed()) {
      std::size_t dots = seed_range.find("..");
      if (dots == std::string::npos) {
        throw mbrl::ConfigError("--seeds expects a..b, got: " + seed_range);
      }
      long first = std::stol(seed_range.substr(0, dots));
      long last = std::stol(seed_range.substr(dots + 2));
      if (last < first) throw mbrl::ConfigError("--seeds range is empty");

      auto base = mbrl::parse_config_file(sweep_args.config_file, collect_overrides(sweep_args));
      std::string base_dir = base.output_dir;
      std::vector<std::future<void>> pending;
      for (long s = first; s <= last; ++s) {
        mbrl::ExperimentConfig config = base;
        config.seed = static_cast<std::uint64_t>(s);
        config.output_dir = base_dir + "/seed_" + std::to_string(s);
        pending.push_back(std::async(std::launch::async, [config] { mbrl::run_experiment(config); }));
        if (static_cast<int>(pending.size()) >= std::max(jobs, 1)) {
          pending.front().get();
          pending.erase(pending.begin());
        }
      }
      for (auto& f : pending) f.get();
      std::printf("sweep finished: seeds %ld..%ld in %s\n", first, last, base_dir.c_str());
      return 0;
    }
    if (plot_cmd->parsed()) {
      std::string out = mbrl::plot_learning_curve(plot_dir);
      std::printf("wrote %s\n", out.c_str());
      return 0;
    }
  } catch (const mbrl::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const mbrl::NumericError& e) {
    std::fprintf(stderr, "numeric error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
