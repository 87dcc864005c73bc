// pairnet command-line interface: train, select, simulate, bench, memory-report.

#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pairnet/commands.hpp"

namespace {

enum ExitCode : int { kOk = 0, kFailure = 1, kConfig = 2, kData = 3, kDegenerate = 4 };

struct Options {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> models;
};

pairnet::config::RunConfig load_config(const Options& o) {
  auto cfg = pairnet::config::load(o.config_path, o.seed);
  if (!o.out_dir.empty()) cfg.output_dir = o.out_dir;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"PairNet: one-shot least-squares neural networks with incremental learning"};
  app.require_subcommand(1);

  Options opt;
  auto add_common = [&](CLI::App* cmd, bool models) {
    cmd->add_option("--config", opt.config_path, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--out", opt.out_dir, "Output directory (overrides output_dir)");
    cmd->add_option("--seed", opt.seed, "Seed (overrides the config seed)");
    if (models) cmd->add_option("--model", opt.models, "Model artifact (repeatable)");
  };

  auto* train = app.add_subcommand("train", "Fit a partitioned PairNet on the training split");
  add_common(train, false);
  auto* select = app.add_subcommand("select", "Random search over partitions; keep the best model");
  add_common(select, false);
  auto* simulate = app.add_subcommand("simulate", "Predict-then-update evaluation on the test stream");
  add_common(simulate, true);
  auto* bench = app.add_subcommand("bench", "Update timing and memory payload report");
  add_common(bench, true);
  auto* memory = app.add_subcommand("memory-report", "Payload accounting only");
  add_common(memory, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    // Usage mistakes count as configuration errors; --help stays 0.
    return code == 0 ? kOk : kConfig;
  }

  try {
    const auto cfg = load_config(opt);
    if (*train) pairnet::cli::cmd_train(cfg, std::cout);
    else if (*select) pairnet::cli::cmd_select(cfg, std::cout);
    else if (*simulate) pairnet::cli::cmd_simulate(cfg, opt.models, std::cout);
    else if (*bench) pairnet::cli::cmd_bench(cfg, opt.models, std::cout);
    else if (*memory) pairnet::cli::cmd_memory_report(cfg, opt.models, std::cout);
  } catch (const pairnet::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const pairnet::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kData;
  } catch (const pairnet::DegenerateError& e) {
    std::cerr << "numerical degeneracy: " << e.what() << "\n";
    return kDegenerate;
  } catch (const pairnet::ContractError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kOk;
}
