#pragma once

// CLI command implementations. Kept header-only so the integration tests can
// drive them in-process.

#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pairnet/benchmark.hpp"
#include "pairnet/config.hpp"
#include "pairnet/dataio.hpp"
#include "pairnet/incremental.hpp"
#include "pairnet/mlp.hpp"
#include "pairnet/selection.hpp"
#include "pairnet/serialization.hpp"
#include "pairnet/trainer.hpp"

namespace pairnet::cli {

using json = nlohmann::json;
namespace fs = std::filesystem;
using bench::BenchReport;
using bench::BenchRow;

/// 0 quiet, 1 default, 2 verbose. Read from PAIRNET_VERBOSITY.
inline int verbosity() {
  const char* v = std::getenv("PAIRNET_VERBOSITY");
  if (!v || !*v) return 1;
  return std::atoi(v);
}

inline void log(int level, const std::string& msg) {
  if (verbosity() >= level) std::cerr << msg << "\n";
}

struct LoadedData {
  dataio::TimeSeries series;
  std::size_t skipped_rows = 0;
  dataio::WindowedDataset windowed;
  dataio::Split split;
};

inline LoadedData load_data(const config::RunConfig& cfg) {
  LoadedData d;
  if (cfg.csv) {
    auto parsed = dataio::parse_csv(cfg.csv->path, cfg.csv->value_column, cfg.csv->date_column);
    d.series = std::move(parsed.series);
    d.skipped_rows = parsed.skipped_rows;
    if (d.skipped_rows) log(1, "skipped " + std::to_string(d.skipped_rows) + " rows with missing or non-numeric values");
  } else {
    d.series = dataio::synth_series(cfg.synth->kind, cfg.synth->length, cfg.synth->seed, cfg.synth->params);
  }
  d.windowed = dataio::window(d.series, cfg.window);
  d.split = dataio::split(d.windowed, cfg.split);
  log(2, "train samples: " + std::to_string(d.split.train.size()) + ", input range [" +
             std::to_string(d.split.train_min) + ", " + std::to_string(d.split.train_max) + "]");
  return d;
}

/// Fixed partition over the shared training input range.
inline PartitionSpec build_partition(const config::PairNetSpec& p, const dataio::Split& split) {
  std::vector<AxisGrid> axes;
  Rng unused(0);
  std::vector<double> column;
  for (std::size_t i = 0; i < p.intervals.size(); ++i) {
    if (p.mode == GridMode::quantile) {
      column.clear();
      for (const auto& s : split.train) column.push_back(s.x[i]);
    }
    axes.push_back(random_grid(split.train_min, split.train_max, p.intervals[i], unused, p.mode, column));
  }
  return PartitionSpec(std::move(axes));
}

inline fs::path prepare_output(const config::RunConfig& cfg) {
  fs::path out(cfg.output_dir);
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw DataError("cannot create output directory '" + out.string() + "': " + ec.message());
  return out;
}

inline void maybe_dump_dataset(const config::RunConfig& cfg, const LoadedData& d, const fs::path& out) {
  if (cfg.dump_dataset) io::write_atomic(out / "dataset.csv", dataio::dump_csv(d.series));
}

inline json bank_summary(const ModelBank& bank) {
  json locals = json::array();
  for (std::size_t j = 0; j < bank.locals.size(); ++j) {
    const auto& l = bank.locals[j];
    locals.push_back({{"subspace", j},
                      {"count", l.stats.count},
                      {"status", to_string(l.status)},
                      {"training_mse", l.diagnostics.training_mse},
                      {"condition", linalg::to_string(l.diagnostics.solve_report.flag)},
                      {"ridge", l.diagnostics.solve_report.ridge_applied},
                      {"normal_residual", l.diagnostics.normal_residual}});
  }
  return json{{"subspaces", locals},
              {"global_fallback",
               {{"count", bank.global_fallback.stats.count},
                {"status", to_string(bank.global_fallback.status)},
                {"training_mse", bank.global_fallback.diagnostics.training_mse}}}};
}

inline void print_bank_summary(const ModelBank& bank, std::ostream& os) {
  os << std::left << std::setw(10) << "Subspace" << std::right << std::setw(10) << "N_j" << std::setw(16)
     << "Status" << std::setw(16) << "Train MSE" << std::setw(24) << "Condition" << "\n";
  auto row = [&](const std::string& label, const LocalModel& l) {
    os << std::left << std::setw(10) << label << std::right << std::setw(10) << l.stats.count << std::setw(16)
       << to_string(l.status) << std::setw(16) << std::setprecision(6) << l.diagnostics.training_mse
       << std::setw(24) << linalg::to_string(l.diagnostics.solve_report.flag) << "\n";
  };
  for (std::size_t j = 0; j < bank.locals.size(); ++j) row(std::to_string(j), bank.locals[j]);
  row("global", bank.global_fallback);
}

struct TrainOutput {
  ModelBank bank;
  fs::path model_path;
  double training_mse = 0.0;
};

/// Fits the configured partition on the train split and writes model.json.
inline TrainOutput cmd_train(const config::RunConfig& cfg, std::ostream& os) {
  const auto data = load_data(cfg);
  const auto out = prepare_output(cfg);
  maybe_dump_dataset(cfg, data, out);
  const auto spec = build_partition(cfg.partition, data.split);
  TrainOutput result;
  result.bank = fit_bank(data.split.train, spec, cfg.alphas);
  result.training_mse = training_mse(result.bank, data.split.train);
  result.model_path = out / "model.json";
  io::save_model(result.bank, result.model_path);

  json summary = bank_summary(result.bank);
  summary["name"] = cfg.partition.name;
  summary["train_samples"] = data.split.train.size();
  summary["training_mse"] = result.training_mse;
  io::write_atomic(out / "train_summary.json", summary.dump(1) + "\n");

  os << cfg.partition.name << ": " << spec.subspace_count() << " subspaces, " << data.split.train.size()
     << " training samples, training MSE " << std::setprecision(6) << result.training_mse << "\n";
  print_bank_summary(result.bank, os);
  os << "wrote " << result.model_path.string() << "\n";
  return result;
}

inline json leaderboard_json(const SearchResult& r, const SearchConfig& cfg) {
  json rows = json::array();
  for (const auto& c : r.leaderboard) {
    json axes = json::array();
    for (const auto& a : c.spec.axes()) axes.push_back({{"lo", a.lo}, {"hi", a.hi}, {"cuts", a.cuts}});
    rows.push_back({{"rank", c.rank}, {"candidate", c.index}, {"score", c.score},
                    {"subspaces", c.spec.subspace_count()}, {"axes", axes}});
  }
  return json{{"K", cfg.candidates},
              {"grid_mode", to_string(cfg.grid_mode)},
              {"eval", cfg.eval == EvalMode::holdout ? "holdout" : "train_mse"},
              {"holdout_fraction", cfg.holdout_fraction},
              {"seed", cfg.seed},
              {"degenerate_candidates", r.degenerate},
              {"leaderboard", rows}};
}

struct SelectOutput {
  SearchResult search;
  fs::path model_path;
  fs::path leaderboard_path;
};

/// Random partition search; writes the winner and the leaderboard.
inline SelectOutput cmd_select(const config::RunConfig& cfg, std::ostream& os) {
  const auto data = load_data(cfg);
  const auto out = prepare_output(cfg);
  maybe_dump_dataset(cfg, data, out);
  SelectOutput result;
  result.search = random_search(data.split.train, cfg.search);
  result.model_path = out / "model.json";
  result.leaderboard_path = out / "leaderboard.json";
  io::save_model(result.search.best, result.model_path);
  io::write_atomic(result.leaderboard_path, leaderboard_json(result.search, cfg.search).dump(1) + "\n");

  os << "evaluated " << cfg.search.candidates + 1 << " candidates (" << result.search.degenerate
     << " degenerate)\n";
  const std::size_t shown = std::min<std::size_t>(10, result.search.leaderboard.size());
  os << std::left << std::setw(6) << "Rank" << std::setw(11) << "Candidate" << std::setw(11) << "Subspaces"
     << "Score\n";
  for (std::size_t i = 0; i < shown; ++i) {
    const auto& c = result.search.leaderboard[i];
    os << std::left << std::setw(6) << c.rank << std::setw(11) << c.index << std::setw(11)
       << c.spec.subspace_count() << std::setprecision(6) << c.score << "\n";
  }
  print_bank_summary(result.search.best, os);
  os << "wrote " << result.model_path.string() << " and " << result.leaderboard_path.string() << "\n";
  return result;
}

struct NamedBank {
  std::string name;
  ModelBank bank;
};

/// PairNet models for simulate/bench: --model artifacts, else the configured list.
inline std::vector<NamedBank> collect_pairnets(const config::RunConfig& cfg, const LoadedData& data,
                                               const std::vector<std::string>& model_paths) {
  std::vector<NamedBank> out;
  for (const auto& p : model_paths) {
    auto bank = io::load_model(p);
    if (bank.inputs() != cfg.window)
      throw DataError("model '" + p + "' has " + std::to_string(bank.inputs()) + " inputs but window is " +
                      std::to_string(cfg.window));
    out.push_back({fs::path(p).stem().string(), std::move(bank)});
  }
  if (!model_paths.empty()) return out;
  auto specs = cfg.pairnets;
  if (specs.empty()) specs.push_back(cfg.partition);
  for (const auto& s : specs)
    out.push_back({s.name, fit_bank(data.split.train, build_partition(s, data.split), cfg.alphas)});
  return out;
}

inline json mlp_metadata(const config::BaselineSpec& b) {
  const auto& m = b.mlp;
  return json{{"hidden_layers", m.hidden_layers},
              {"neurons_per_layer", m.neurons_per_layer},
              {"activation", mlp::to_string(m.activation)},
              {"optimizer", mlp::to_string(m.optimizer.kind)},
              {"lr", m.optimizer.lr},
              {"pretrain_epochs", m.epochs},
              {"batch_size", m.batch_size},
              {"finetune_epochs", b.finetune_epochs},
              {"finetune_window", b.finetune_window},
              {"finetune_optimizer_state", "fresh per update"},
              {"standardization", "z-score from training split"},
              {"loss", "mean squared error"},
              {"seed", m.seed}};
}

inline json pairnet_metadata(const ModelBank& bank) {
  json intervals = json::array();
  for (const auto& a : bank.spec.axes()) intervals.push_back(a.intervals());
  return json{{"intervals", intervals},
              {"subspaces", bank.spec.subspace_count()},
              {"populated_subspaces", populated_subspaces(bank)},
              {"alphas", bank.alphas}};
}

/// Runs every PairNet and MLP baseline through the predict-then-update loop
/// over the test block; one BenchRow per model with a cell per N.
inline BenchReport run_benchmark(const config::RunConfig& cfg, const std::vector<std::string>& model_paths) {
  if (cfg.split.test_counts.empty()) throw ConfigError("config /split/test_counts: need at least one N");
  const auto data = load_data(cfg);
  const std::size_t max_n = cfg.split.max_test();
  const auto stream = make_stream(data.split.test, cfg.split.train_count);

  BenchReport report;
  report.environment = bench::environment_metadata();
  for (auto& nb : collect_pairnets(cfg, data, model_paths)) {
    log(1, "simulating " + nb.name);
    const auto sim = simulate_protocol(nb.bank, stream, max_n);
    BenchRow row;
    row.name = nb.name;
    row.kind = "pairnet";
    row.epochs = 1;
    row.cells = bench::cells_from(sim, cfg.split.test_counts);
    const auto payload = bench::pairnet_payload(nb.bank);
    row.parameter_bytes = payload.parameter_bytes;
    row.stats_bytes = payload.stats_bytes;
    row.metadata = pairnet_metadata(nb.bank);
    report.rows.push_back(std::move(row));
  }
  for (const auto& b : cfg.baselines) {
    log(1, "pre-training " + b.name + " (" + b.mlp.describe() + ")");
    auto model = mlp::mlp_train(data.split.train, b.mlp);
    const auto bytes = bench::mlp_parameter_bytes(model);
    bench::MlpForecaster forecaster(std::move(model), b.finetune_epochs, b.mlp.optimizer, b.finetune_window);
    log(1, "simulating " + b.name);
    const auto sim = run_protocol(forecaster, stream, max_n);
    BenchRow row;
    row.name = b.name;
    row.kind = "mlp";
    row.epochs = b.finetune_epochs;
    row.cells = bench::cells_from(sim, cfg.split.test_counts);
    row.parameter_bytes = bytes;
    row.metadata = mlp_metadata(b);
    report.rows.push_back(std::move(row));
  }
  return report;
}

/// Prediction MSE and update-time tables.
inline BenchReport cmd_simulate(const config::RunConfig& cfg, const std::vector<std::string>& model_paths,
                                std::ostream& os) {
  const auto out = prepare_output(cfg);
  auto report = run_benchmark(cfg, model_paths);
  const std::string text = bench::mse_table(report) + "\n" + bench::time_table(report);
  io::write_atomic(out / "report.json", bench::to_json(report).dump(1) + "\n");
  io::write_atomic(out / "report.txt", text);
  os << text;
  return report;
}

/// Median update times plus payload accounting.
inline BenchReport cmd_bench(const config::RunConfig& cfg, const std::vector<std::string>& model_paths,
                             std::ostream& os) {
  const auto out = prepare_output(cfg);
  auto report = run_benchmark(cfg, model_paths);
  const std::string text = bench::time_table(report, true) + "\n" + bench::memory_table(report);
  io::write_atomic(out / "bench.json", bench::to_json(report).dump(1) + "\n");
  io::write_atomic(out / "bench.txt", text);
  os << text;
  return report;
}

/// Payload accounting only; no data or training needed for configured models.
inline BenchReport cmd_memory_report(const config::RunConfig& cfg, const std::vector<std::string>& model_paths,
                                     std::ostream& os) {
  BenchReport report;
  for (const auto& p : model_paths) {
    const auto bank = io::load_model(p);
    const auto payload = bench::pairnet_payload(bank);
    report.rows.push_back({fs::path(p).stem().string(), "pairnet", 1, {}, payload.parameter_bytes,
                           payload.stats_bytes, pairnet_metadata(bank)});
  }
  if (model_paths.empty()) {
    auto specs = cfg.pairnets;
    if (specs.empty()) specs.push_back(cfg.partition);
    for (const auto& s : specs) {
      std::size_t m = 1;
      std::size_t cuts = 0;
      for (auto k : s.intervals) {
        m *= k;
        cuts += k - 1;
      }
      const auto payload = bench::pairnet_payload(cfg.window, m, cuts);
      report.rows.push_back({s.name, "pairnet", 1, {}, payload.parameter_bytes, payload.stats_bytes, json::object()});
    }
  }
  for (const auto& b : cfg.baselines)
    report.rows.push_back({b.name, "mlp", b.finetune_epochs, {},
                           bench::mlp_parameter_bytes(cfg.window, b.mlp.hidden_layers, b.mlp.neurons_per_layer), 0,
                           mlp_metadata(b)});
  os << bench::memory_table(report);
  return report;
}

}  // namespace pairnet::cli
