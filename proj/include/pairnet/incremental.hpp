#pragma once

// Exact incremental learning and the predict-then-update evaluation loop.
//
// An update folds one sample into its subspace's statistics and re-solves
// that subspace only (plus the global network). Because the statistics are
// plain sums, a stream of updates lands on exactly the batch fit of the
// union, at a cost independent of history length.

#include <chrono>
#include <concepts>
#include <cstddef>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "pairnet/dataset.hpp"
#include "pairnet/error.hpp"
#include "pairnet/trainer.hpp"

namespace pairnet {

struct StreamEvent {
  std::size_t order = 0;
  Sample sample;
};

/// Wraps consecutive samples as an ordered event stream.
inline std::vector<StreamEvent> make_stream(std::span<const Sample> samples, std::size_t first_order = 0) {
  std::vector<StreamEvent> out;
  out.reserve(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) out.push_back({first_order + i, samples[i]});
  return out;
}

/// Algorithm-3 update. Throws ContractError (bank untouched) on a non-finite
/// or mis-sized sample.
inline SubspaceId update(ModelBank& bank, const Sample& d) {
  if (d.x.size() != bank.inputs())
    throw ContractError("update: expected " + std::to_string(bank.inputs()) + " inputs, got " +
                        std::to_string(d.x.size()));
  if (!d.finite()) throw ContractError("update: non-finite event rejected");
  auto id = locate(d.x, bank.spec);
  auto& local = bank.locals[id.flat];
  std::vector<double> phi(param_count(bank.inputs()));
  accumulate(local.stats, d.x, d.y, local.cfg, phi);
  refit(local);
  accumulate(bank.global_fallback.stats, d.x, d.y, bank.global_fallback.cfg, phi);
  refit(bank.global_fallback);
  return id;
}

inline SubspaceId update(ModelBank& bank, const StreamEvent& event) { return update(bank, event.sample); }

/// Single-writer, multi-reader holder. Readers get an immutable snapshot;
/// update() publishes a modified copy in one pointer swap.
class SnapshotModel {
public:
  explicit SnapshotModel(ModelBank bank)
      : current_(std::make_shared<const ModelBank>(std::move(bank))) {}

  std::shared_ptr<const ModelBank> snapshot() const {
    std::lock_guard lock(mutex_);
    return current_;
  }

  Prediction predict(std::span<const double> x) const { return pairnet::predict(*snapshot(), x); }

  void update(const Sample& d) {
    auto next = std::make_shared<ModelBank>(*snapshot());
    pairnet::update(*next, d);
    std::lock_guard lock(mutex_);
    current_ = std::move(next);
  }

private:
  mutable std::mutex mutex_;
  std::shared_ptr<const ModelBank> current_;
};

struct PredictionRecord {
  std::size_t order = 0;
  double predicted = 0.0;
  double actual = 0.0;
  double squared_error = 0.0;
  std::size_t subspace = 0;
  bool used_fallback = false;
  double update_seconds = 0.0;
};

struct SimulationReport {
  std::size_t n = 0;  // evaluated stream length
  double avg_mse = 0.0;
  double avg_update_seconds = 0.0;
  std::vector<PredictionRecord> records;

  /// Aggregates over the first k records (the report for a shorter stream).
  SimulationReport prefix(std::size_t k) const {
    detail::require(k >= 1 && k <= records.size(), "SimulationReport::prefix: bad length");
    SimulationReport r;
    r.records.assign(records.begin(), records.begin() + static_cast<std::ptrdiff_t>(k));
    r.finalize();
    return r;
  }

  void finalize() {
    n = records.size();
    double se = 0.0;
    double secs = 0.0;
    for (const auto& rec : records) {
      se += rec.squared_error;
      secs += rec.update_seconds;
    }
    avg_mse = n ? se / static_cast<double>(n) : 0.0;
    avg_update_seconds = n ? secs / static_cast<double>(n) : 0.0;
  }
};

/// What the evaluation loop needs from a model.
template <typename M>
concept OnlineForecaster = requires(M m, const M cm, const Sample& s) {
  { cm.forecast(s.x) } -> std::convertible_to<Prediction>;
  m.learn(s);
};

/// PairNet bank adapter for the evaluation loop.
class BankForecaster {
public:
  explicit BankForecaster(ModelBank bank) : bank_(std::move(bank)) {}
  Prediction forecast(std::span<const double> x) const { return predict(bank_, x); }
  void learn(const Sample& s) { update(bank_, s); }
  const ModelBank& bank() const { return bank_; }

private:
  ModelBank bank_;
};

/// Predict-then-update over the first `count` events: each event is forecast
/// before its target is revealed, then learned. Update wall time is measured
/// with a monotonic clock.
template <OnlineForecaster M>
SimulationReport run_protocol(M& model, std::span<const StreamEvent> stream, std::size_t count) {
  if (count == 0) throw ContractError("simulate_protocol: N must be at least 1");
  if (stream.size() < count)
    throw DataError("simulate_protocol: stream has " + std::to_string(stream.size()) +
                    " events, need " + std::to_string(count));
  SimulationReport report;
  report.records.reserve(count);
  for (std::size_t t = 0; t < count; ++t) {
    const auto& ev = stream[t];
    if (t > 0 && !(ev.order > stream[t - 1].order))
      throw DataError("simulate_protocol: event order must be strictly increasing");
    const Prediction p = model.forecast(ev.sample.x);
    PredictionRecord rec;
    rec.order = ev.order;
    rec.predicted = p.value;
    rec.actual = ev.sample.y;
    rec.squared_error = (p.value - ev.sample.y) * (p.value - ev.sample.y);
    rec.subspace = p.subspace.flat;
    rec.used_fallback = p.used_fallback;
    const auto start = std::chrono::steady_clock::now();
    model.learn(ev.sample);
    const auto stop = std::chrono::steady_clock::now();
    rec.update_seconds = std::chrono::duration<double>(stop - start).count();
    report.records.push_back(rec);
  }
  report.finalize();
  return report;
}

/// Runs the protocol on a copy of a pre-trained bank.
inline SimulationReport simulate_protocol(const ModelBank& pretrained, std::span<const StreamEvent> stream,
                                          std::size_t count) {
  BankForecaster model(pretrained);
  return run_protocol(model, stream, count);
}

/// Pre-trains on `train` with the given partition, then runs the protocol.
inline SimulationReport simulate_protocol(std::span<const Sample> train, const PartitionSpec& spec,
                                          std::span<const StreamEvent> stream, std::size_t count,
                                          std::vector<double> alphas = {}) {
  return simulate_protocol(fit_bank(train, spec, std::move(alphas)), stream, count);
}

}  // namespace pairnet
