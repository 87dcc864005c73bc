#pragma once

// One-shot least-squares training of partitioned PairNets.
//
// Each subspace keeps the sufficient statistics of its samples: the Gram
// matrix sum(phi phi^T), the moment vector sum(phi y) and output moments.
// Fitting solves the 2^(n+1) normal equations once; there is no iteration
// over the data beyond the single routing sweep.

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "pairnet/dataset.hpp"
#include "pairnet/error.hpp"
#include "pairnet/linalg.hpp"
#include "pairnet/network.hpp"
#include "pairnet/partition.hpp"

namespace pairnet {

struct SufficientStats {
  linalg::SymMatrix gram;     // sum phi phi^T
  std::vector<double> moment; // sum phi y
  std::size_t count = 0;
  double sum_y = 0.0;
  double sum_y2 = 0.0;

  SufficientStats() = default;
  explicit SufficientStats(std::size_t n)
      : gram(param_count(n)), moment(param_count(n), 0.0) {}

  std::size_t dim() const { return moment.size(); }

  friend bool operator==(const SufficientStats&, const SufficientStats&) = default;
};

enum class FitStatus { fitted, fallback_mean, empty };

inline const char* to_string(FitStatus s) {
  switch (s) {
    case FitStatus::fitted: return "fitted";
    case FitStatus::fallback_mean: return "fallback_mean";
    case FitStatus::empty: return "empty";
  }
  return "unknown";
}

inline FitStatus fit_status_from_string(const std::string& s) {
  if (s == "fitted") return FitStatus::fitted;
  if (s == "fallback_mean") return FitStatus::fallback_mean;
  if (s == "empty") return FitStatus::empty;
  throw ContractError("unknown fit status '" + s + "'");
}

struct FitDiagnostics {
  double training_mse = 0.0;     // SSE / N_j, from the statistics
  linalg::SolveReport solve_report;
  double normal_residual = 0.0;  // ||A p - b||_inf
};

struct LocalModel {
  PairNetParams params;
  ActivationConfig cfg;
  SufficientStats stats;
  FitStatus status = FitStatus::empty;
  FitDiagnostics diagnostics;
};

/// Per-subspace local networks plus a global network fitted on all data,
/// used for subspaces that never received a sample.
struct ModelBank {
  PartitionSpec spec;
  std::vector<double> alphas;
  std::vector<LocalModel> locals;
  LocalModel global_fallback;

  std::size_t inputs() const { return spec.inputs(); }
};

/// Folds one sample into the statistics. `phi` is scratch space of 2^(n+1).
inline void accumulate(SufficientStats& stats, std::span<const double> x, double y,
                       const ActivationConfig& cfg, std::span<double> phi) {
  if (!std::isfinite(y)) throw ContractError("accumulate: non-finite target");
  detail::require(stats.dim() == param_count(cfg.n()), "accumulate: statistics sized for another n");
  feature_vector(x, cfg, phi);
  linalg::rank1_update(stats.gram, stats.moment, phi, y);
  ++stats.count;
  stats.sum_y += y;
  stats.sum_y2 += y * y;
}

inline void accumulate(SufficientStats& stats, std::span<const double> x, double y,
                       const ActivationConfig& cfg) {
  std::vector<double> phi(param_count(cfg.n()));
  accumulate(stats, x, y, cfg, phi);
}

/// Sum of squared errors of stacked parameters p, from the statistics alone:
/// sum y^2 - 2 p.b + p^T A p.
inline double stats_sse(const SufficientStats& stats, std::span<const double> p) {
  const auto ap = linalg::multiply(stats.gram, p);
  double pap = 0.0;
  double pb = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    pap += p[i] * ap[i];
    pb += p[i] * stats.moment[i];
  }
  return std::max(0.0, stats.sum_y2 - 2.0 * pb + pap);
}

struct LocalFit {
  PairNetParams params;
  FitDiagnostics diagnostics;
  FitStatus status = FitStatus::empty;
};

/// Solves the normal equations of one subspace.
inline LocalFit fit_local(const SufficientStats& stats, const ActivationConfig& cfg) {
  const std::size_t n = cfg.n();
  LocalFit out;
  out.params = PairNetParams::zeros(n);
  if (stats.count == 0) return out;

  auto sol = linalg::solve_spd(stats.gram, stats.moment);
  out.diagnostics.solve_report = sol.report;
  out.diagnostics.normal_residual = sol.report.residual_inf_norm;
  out.status = FitStatus::fitted;

  bool finite = true;
  for (double v : sol.x) finite = finite && std::isfinite(v);
  const double b_norm = linalg::inf_norm(stats.moment);
  if (!finite || (sol.report.flag == linalg::ConditionFlag::fallback_minimum_norm &&
                  sol.report.residual_inf_norm > 1e-6 * (1.0 + b_norm))) {
    const double mean = stats.sum_y / static_cast<double>(stats.count);
    out.params.c.assign(fusion_count(n), mean);
    out.params.gamma.assign(fusion_count(n), 0.0);
    out.status = FitStatus::fallback_mean;
    const auto p = out.params.stacked();
    out.diagnostics.normal_residual = linalg::residual_inf_norm(stats.gram, p, stats.moment);
  } else {
    out.params = PairNetParams::from_stacked(n, sol.x);
  }
  out.diagnostics.training_mse =
      stats_sse(stats, out.params.stacked()) / static_cast<double>(stats.count);
  return out;
}

/// Refits a local model in place from its current statistics.
inline void refit(LocalModel& local) {
  auto fit = fit_local(local.stats, local.cfg);
  local.params = std::move(fit.params);
  local.diagnostics = fit.diagnostics;
  local.status = fit.status;
}

struct FitOptions {
  /// Called once per training sample read during the routing sweep.
  std::function<void(std::size_t)> on_sample;
};

/// Builds an unfitted bank: local configs from subspace bounds, zero statistics.
inline ModelBank make_bank(const PartitionSpec& spec, std::vector<double> alphas) {
  const std::size_t n = spec.inputs();
  if (alphas.empty()) alphas = ActivationConfig::equal_alphas(n);
  detail::require(alphas.size() == n, "make_bank: alpha count differs from input count");
  ModelBank bank;
  bank.spec = spec;
  bank.alphas = alphas;
  bank.locals.reserve(spec.subspace_count());
  for (std::size_t j = 0; j < spec.subspace_count(); ++j) {
    auto bounds = subspace_bounds(j, spec);
    LocalModel local;
    local.cfg = ActivationConfig{alphas, std::move(bounds.lo), std::move(bounds.hi)};
    local.cfg.validate();
    local.stats = SufficientStats(n);
    local.params = PairNetParams::zeros(n);
    bank.locals.push_back(std::move(local));
  }
  bank.global_fallback.cfg = ActivationConfig{alphas, spec.lo(), spec.hi()};
  bank.global_fallback.cfg.validate();
  bank.global_fallback.stats = SufficientStats(n);
  bank.global_fallback.params = PairNetParams::zeros(n);
  return bank;
}

/// Fits one local network per subspace in a single pass over the data.
inline ModelBank fit_bank(std::span<const Sample> data, const PartitionSpec& spec,
                          std::vector<double> alphas = {}, const FitOptions& options = {}) {
  if (data.empty()) throw DataError("fit_bank: empty training data");
  const std::size_t n = spec.inputs();
  ModelBank bank = make_bank(spec, std::move(alphas));
  std::vector<double> phi(param_count(n));
  for (std::size_t p = 0; p < data.size(); ++p) {
    const Sample& s = data[p];
    if (options.on_sample) options.on_sample(p);
    if (s.x.size() != n)
      throw DataError("fit_bank: sample " + std::to_string(p) + " has " +
                      std::to_string(s.x.size()) + " inputs, expected " + std::to_string(n));
    if (!s.finite()) throw DataError("fit_bank: sample " + std::to_string(p) + " is not finite");
    auto& local = bank.locals[locate(s.x, spec).flat];
    accumulate(local.stats, s.x, s.y, local.cfg, phi);
    accumulate(bank.global_fallback.stats, s.x, s.y, bank.global_fallback.cfg, phi);
  }
  for (auto& local : bank.locals) refit(local);
  refit(bank.global_fallback);
  return bank;
}

struct Prediction {
  double value = 0.0;
  SubspaceId subspace;
  bool used_fallback = false;  // delegated to the global network
};

/// Routes x to its subspace and evaluates that subspace's network. Empty
/// subspaces delegate to the global network.
inline Prediction predict(const ModelBank& bank, std::span<const double> x) {
  Prediction out;
  out.subspace = locate(x, bank.spec);
  const LocalModel& local = bank.locals[out.subspace.flat];
  if (local.status != FitStatus::empty) {
    out.value = evaluate(x, local.cfg, local.params);
  } else {
    out.used_fallback = true;
    out.value = bank.global_fallback.status == FitStatus::empty
                    ? 0.0
                    : evaluate(x, bank.global_fallback.cfg, bank.global_fallback.params);
  }
  return out;
}

/// Mean squared prediction error over `data`.
inline double training_mse(const ModelBank& bank, std::span<const Sample> data) {
  if (data.empty()) throw DataError("training_mse: empty data");
  double sse = 0.0;
  for (const auto& s : data) {
    const double e = s.y - predict(bank, s.x).value;
    sse += e * e;
  }
  return sse / static_cast<double>(data.size());
}

/// Number of locals with at least one sample.
inline std::size_t populated_subspaces(const ModelBank& bank) {
  std::size_t k = 0;
  for (const auto& l : bank.locals) k += l.stats.count > 0 ? 1 : 0;
  return k;
}

}  // namespace pairnet
