#pragma once

// Benchmark harness: PairNet and MLP models driven through the same
// predict-then-update loop, payload accounting, and report rendering.
// Text tables and JSON are rendered from the same BenchReport values.

#include <algorithm>
#include <chrono>
#include <cstddef>
#include <ctime>
#include <deque>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pairnet/dataset.hpp"
#include "pairnet/incremental.hpp"
#include "pairnet/mlp.hpp"
#include "pairnet/trainer.hpp"

namespace pairnet::bench {

using json = nlohmann::json;

/// Backprop baseline adapter: forecast, then fine-tune on the newest sample
/// (or the last `window` samples) for a fixed number of epochs.
class MlpForecaster {
public:
  MlpForecaster(mlp::MlpModel model, std::size_t finetune_epochs, mlp::OptimizerConfig optimizer,
                std::size_t window = 1)
      : model_(std::move(model)), epochs_(finetune_epochs), optimizer_(optimizer), window_(std::max<std::size_t>(window, 1)) {}

  Prediction forecast(std::span<const double> x) const {
    Prediction p;
    p.value = mlp::mlp_predict(model_, x);
    return p;
  }

  void learn(const Sample& s) {
    recent_.push_back(s);
    while (recent_.size() > window_) recent_.pop_front();
    Dataset batch(recent_.begin(), recent_.end());
    mlp::mlp_fine_tune(model_, batch, epochs_, optimizer_);
  }

  const mlp::MlpModel& model() const { return model_; }

private:
  mlp::MlpModel model_;
  std::size_t epochs_;
  mlp::OptimizerConfig optimizer_;
  std::size_t window_;
  std::deque<Sample> recent_;
};

/// Payload of a bank in bytes (8-byte floats).
struct PairNetPayload {
  std::size_t parameter_bytes = 0;  // c and gamma of every local
  std::size_t stats_bytes = 0;      // Gram matrix and moment vector of every local
  std::size_t partition_bytes = 0;  // axis bounds, cuts and alphas
  std::size_t fallback_bytes = 0;   // global network: parameters and statistics

  std::size_t with_stats() const { return parameter_bytes + stats_bytes; }
  std::size_t total() const { return parameter_bytes + stats_bytes + partition_bytes + fallback_bytes; }
};

inline PairNetPayload pairnet_payload(std::size_t inputs, std::size_t subspaces, std::size_t cut_count) {
  const std::size_t k = fusion_count(inputs);
  const std::size_t dim = param_count(inputs);
  PairNetPayload p;
  p.parameter_bytes = subspaces * 2 * k * 8;
  p.stats_bytes = subspaces * (dim * dim + dim) * 8;
  p.partition_bytes = (2 * inputs + cut_count + inputs) * 8;
  p.fallback_bytes = (2 * k + dim * dim + dim) * 8;
  return p;
}

inline PairNetPayload pairnet_payload(const ModelBank& bank) {
  std::size_t cuts = 0;
  for (const auto& a : bank.spec.axes()) cuts += a.cuts.size();
  return pairnet_payload(bank.inputs(), bank.spec.subspace_count(), cuts);
}

inline std::size_t mlp_parameter_bytes(std::size_t inputs, std::size_t hidden_layers, std::size_t neurons) {
  std::size_t count = 0;
  std::size_t prev = inputs;
  for (std::size_t h = 0; h < hidden_layers; ++h) {
    count += prev * neurons + neurons;
    prev = neurons;
  }
  count += prev + 1;
  return count * 8;
}

inline std::size_t mlp_parameter_bytes(const mlp::MlpModel& m) { return m.parameter_count() * 8; }

/// Reported reference memory figures in KB, echoed for context only.
struct ReferenceFigure {
  const char* model;
  int hidden_layers;
  int kilobytes;
};

inline constexpr ReferenceFigure kReferenceMemoryKb[] = {
    {"PairNet^1 (2 subspaces)", 3, 33}, {"PairNet^2 (4 subspaces)", 3, 47}, {"PairNet_222", 3, 61},
    {"ANN_IL", 3, 101},  {"ANN_IL", 5, 176},  {"ANN_IL", 10, 363},  {"ANN_IL", 20, 740},  {"ANN_IL", 50, 1867},
};

inline constexpr ReferenceFigure kReferenceHyperparameterKb[] = {
    {"PairNet^1 (2 subspaces)", 3, 14}, {"PairNet^2 (4 subspaces)", 3, 28}, {"PairNet_222", 3, 42},
};

inline constexpr int kReferencePairNetCodeKb = 19;

struct MseCell {
  std::size_t n = 0;
  double avg_mse = 0.0;
  double avg_update_seconds = 0.0;
  double median_update_seconds = 0.0;
};

struct BenchRow {
  std::string name;
  std::string kind;  // "pairnet" or "mlp"
  std::size_t epochs = 1;
  std::vector<MseCell> cells;  // one per evaluated N
  std::size_t parameter_bytes = 0;
  std::size_t stats_bytes = 0;  // pairnet only
  json metadata = json::object();
};

struct BenchReport {
  std::vector<BenchRow> rows;
  json environment = json::object();
};

inline double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  return v.size() % 2 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

/// Cells for each requested N, all cut from one run over max(N) events.
inline std::vector<MseCell> cells_from(const SimulationReport& full, std::span<const std::size_t> counts) {
  std::vector<MseCell> cells;
  for (auto n : counts) {
    const auto r = full.prefix(n);
    std::vector<double> times;
    for (const auto& rec : r.records) times.push_back(rec.update_seconds);
    cells.push_back({n, r.avg_mse, r.avg_update_seconds, median(times)});
  }
  return cells;
}

inline json environment_metadata() {
  json env;
  std::string cpu = "unknown";
  std::ifstream info("/proc/cpuinfo");
  for (std::string line; std::getline(info, line);)
    if (line.rfind("model name", 0) == 0) {
      cpu = line.substr(line.find(':') + 2);
      break;
    }
  env["cpu"] = cpu;
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream ts;
  ts << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  env["timestamp"] = ts.str();
  return env;
}

inline json to_json(const BenchReport& report) {
  json rows = json::array();
  for (const auto& r : report.rows) {
    json cells = json::array();
    for (const auto& c : r.cells)
      cells.push_back({{"N", c.n},
                       {"avg_mse", c.avg_mse},
                       {"avg_update_seconds", c.avg_update_seconds},
                       {"median_update_seconds", c.median_update_seconds}});
    json row{{"name", r.name},
             {"kind", r.kind},
             {"epochs", r.epochs},
             {"results", cells},
             {"parameter_bytes", r.parameter_bytes},
             {"metadata", r.metadata}};
    if (r.kind == "pairnet") row["stats_bytes"] = r.stats_bytes;
    rows.push_back(row);
  }
  json mem = json::array();
  for (const auto& f : kReferenceMemoryKb)
    mem.push_back({{"model", f.model}, {"hidden_layers", f.hidden_layers}, {"memory_kb", f.kilobytes}});
  json hyper = json::array();
  for (const auto& f : kReferenceHyperparameterKb) hyper.push_back({{"model", f.model}, {"hyperparameter_kb", f.kilobytes}});
  return json{{"rows", rows},
              {"environment", report.environment},
              {"reference_figures",
               {{"memory_kb", mem}, {"hyperparameter_kb", hyper}, {"pairnet_code_kb", kReferencePairNetCodeKb}}}};
}

namespace detail {

inline std::string fixed(double v, int precision) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(precision) << v;
  return os.str();
}

inline std::vector<std::size_t> counts_of(const BenchReport& report) {
  std::vector<std::size_t> counts;
  for (const auto& r : report.rows)
    for (const auto& c : r.cells)
      if (std::find(counts.begin(), counts.end(), c.n) == counts.end()) counts.push_back(c.n);
  return counts;
}

template <typename Cell>
std::string table(const BenchReport& report, const std::string& title, Cell cell) {
  const auto counts = counts_of(report);
  std::ostringstream os;
  os << title << "\n";
  os << std::left << std::setw(20) << "Model" << std::right << std::setw(8) << "Epochs";
  for (auto n : counts) os << std::setw(14) << ("N = " + std::to_string(n));
  os << "\n";
  for (const auto& r : report.rows) {
    os << std::left << std::setw(20) << r.name << std::right << std::setw(8) << r.epochs;
    for (auto n : counts) {
      auto it = std::find_if(r.cells.begin(), r.cells.end(), [&](const MseCell& c) { return c.n == n; });
      os << std::setw(14) << (it == r.cells.end() ? std::string("-") : cell(*it));
    }
    os << "\n";
  }
  return os.str();
}

}  // namespace detail

inline std::string mse_table(const BenchReport& report) {
  return detail::table(report, "Average prediction MSE",
                       [](const MseCell& c) { return detail::fixed(c.avg_mse, 4); });
}

inline std::string time_table(const BenchReport& report, bool use_median = false) {
  return detail::table(report,
                       use_median ? "Median per-update training time (seconds)"
                                  : "Average per-update training time (seconds)",
                       [&](const MseCell& c) {
                         return detail::fixed(use_median ? c.median_update_seconds : c.avg_update_seconds, 5);
                       });
}

inline std::string memory_table(const BenchReport& report) {
  std::ostringstream os;
  os << "Hyperparameter payload (computed, 8-byte floats)\n";
  os << std::left << std::setw(20) << "Model" << std::right << std::setw(18) << "Params (bytes)"
     << std::setw(22) << "With stats (bytes)" << "\n";
  for (const auto& r : report.rows) {
    os << std::left << std::setw(20) << r.name << std::right << std::setw(18) << r.parameter_bytes
       << std::setw(22) << (r.kind == "pairnet" ? std::to_string(r.parameter_bytes + r.stats_bytes) : "-")
       << "\n";
  }
  os << "\nReference figures (reported, environment-specific; not computed here)\n";
  os << std::left << std::setw(26) << "Model" << std::right << std::setw(15) << "Hidden layers"
     << std::setw(14) << "Memory (KB)" << "\n";
  for (const auto& f : kReferenceMemoryKb)
    os << std::left << std::setw(26) << f.model << std::right << std::setw(15) << f.hidden_layers
       << std::setw(14) << f.kilobytes << "\n";
  os << "Hyperparameter memory (KB):";
  for (const auto& f : kReferenceHyperparameterKb) os << " " << f.model << " " << f.kilobytes << ";";
  os << " PairNet code " << kReferencePairNetCodeKb << "\n";
  return os.str();
}

}  // namespace pairnet::bench
