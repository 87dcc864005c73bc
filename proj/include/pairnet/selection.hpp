#pragma once

// Random search over grid partitions: an initial random candidate followed by
// K more, keeping the best by evaluation MSE.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pairnet/dataset.hpp"
#include "pairnet/error.hpp"
#include "pairnet/partition.hpp"
#include "pairnet/random.hpp"
#include "pairnet/trainer.hpp"

namespace pairnet {

enum class EvalMode { train_mse, holdout };

struct SearchConfig {
  std::size_t candidates = 200;  // K
  /// Allowed interval counts per axis; a single entry applies to every axis.
  std::vector<std::vector<std::size_t>> m_candidates{{1, 2}};
  GridMode grid_mode = GridMode::quantile;
  EvalMode eval = EvalMode::holdout;
  double holdout_fraction = 0.2;
  std::uint64_t seed = 0;
  std::vector<double> alphas;
  /// Refit the winning partition on all data (train + holdout) before returning.
  bool refit_winner = true;

  void validate(std::size_t inputs) const {
    if (candidates < 1) throw ConfigError("search: K must be at least 1");
    if (eval == EvalMode::holdout && !(holdout_fraction > 0.0 && holdout_fraction <= 0.5))
      throw ConfigError("search: holdout fraction must be in (0, 0.5]");
    if (m_candidates.size() != 1 && m_candidates.size() != inputs)
      throw ConfigError("search: m_candidates needs 1 or " + std::to_string(inputs) + " entries");
    for (const auto& set : m_candidates) {
      if (set.empty()) throw ConfigError("search: empty interval-count candidate set");
      for (auto m : set)
        if (m < 1) throw ConfigError("search: interval counts must be at least 1");
    }
  }

  const std::vector<std::size_t>& axis_candidates(std::size_t axis) const {
    return m_candidates.size() == 1 ? m_candidates.front() : m_candidates[axis];
  }
};

struct CandidateScore {
  std::size_t index = 0;  // 0 is the initial candidate
  PartitionSpec spec;
  double score = 0.0;
  std::size_t rank = 0;
};

struct SearchResult {
  ModelBank best;
  std::vector<CandidateScore> leaderboard;  // ascending by score
  std::vector<double> running_best;         // best score after each candidate
  std::size_t degenerate = 0;
};

/// Mean squared prediction error of a bank.
inline double evaluate(const ModelBank& bank, std::span<const Sample> eval_data) {
  if (eval_data.empty()) throw DataError("evaluate: empty evaluation data");
  return training_mse(bank, eval_data);
}

struct InputBox {
  std::vector<double> lo;
  std::vector<double> hi;
};

/// Per-axis min/max of the inputs. Degenerate axes are widened by 0.5.
inline InputBox input_box(std::span<const Sample> data) {
  if (data.empty()) throw DataError("input_box: empty data");
  const std::size_t n = data.front().x.size();
  InputBox box{data.front().x, data.front().x};
  for (const auto& s : data)
    for (std::size_t i = 0; i < n; ++i) {
      box.lo[i] = std::min(box.lo[i], s.x[i]);
      box.hi[i] = std::max(box.hi[i], s.x[i]);
    }
  for (std::size_t i = 0; i < n; ++i)
    if (!(box.hi[i] > box.lo[i])) {
      box.lo[i] -= 0.5;
      box.hi[i] += 0.5;
    }
  return box;
}

/// Draws one candidate partition from a dedicated stream.
inline PartitionSpec random_partition(const InputBox& box, std::span<const Sample> data,
                                      const SearchConfig& cfg, Rng& rng) {
  const std::size_t n = box.lo.size();
  std::vector<AxisGrid> axes;
  std::vector<double> column;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& choices = cfg.axis_candidates(i);
    const std::size_t m = choices[rng.below(choices.size())];
    if (cfg.grid_mode == GridMode::quantile) {
      column.clear();
      for (const auto& s : data) column.push_back(s.x[i]);
    }
    axes.push_back(random_grid(box.lo[i], box.hi[i], m, rng, cfg.grid_mode, column));
  }
  return PartitionSpec(std::move(axes));
}

/// Random search. Every candidate draws from its own seed stream, so results
/// depend only on (data, cfg).
inline SearchResult random_search(std::span<const Sample> data, const SearchConfig& cfg) {
  if (data.empty()) throw DataError("random_search: empty data");
  const std::size_t n = data.front().x.size();
  cfg.validate(n);

  std::span<const Sample> fit_data = data;
  std::span<const Sample> eval_data = data;
  if (cfg.eval == EvalMode::holdout) {
    const auto held = static_cast<std::size_t>(
        std::floor(cfg.holdout_fraction * static_cast<double>(data.size())));
    if (held < 1 || held >= data.size())
      throw DataError("random_search: " + std::to_string(data.size()) +
                      " samples are too few for a holdout split");
    fit_data = data.first(data.size() - held);
    eval_data = data.last(held);
  }
  const InputBox box = input_box(data);

  SearchResult result;
  std::optional<ModelBank> best;
  double best_score = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k <= cfg.candidates; ++k) {
    Rng rng(derive_seed(cfg.seed, k));
    std::optional<PartitionSpec> spec;
    try {
      spec = random_partition(box, fit_data, cfg, rng);
    } catch (const ContractError&) {
      ++result.degenerate;
      result.running_best.push_back(best_score);
      continue;
    }
    ModelBank bank = fit_bank(fit_data, *spec, cfg.alphas);
    bool any_fitted = false;
    for (const auto& l : bank.locals) any_fitted = any_fitted || l.status == FitStatus::fitted;
    const double score = evaluate(bank, eval_data);
    if (!any_fitted || !std::isfinite(score)) {
      ++result.degenerate;
      result.running_best.push_back(best_score);
      continue;
    }
    result.leaderboard.push_back({k, *spec, score, 0});
    if (score < best_score) {
      best_score = score;
      best = std::move(bank);
    }
    result.running_best.push_back(best_score);
  }
  if (!best) throw DegenerateError("random_search: every candidate was degenerate");

  std::stable_sort(result.leaderboard.begin(), result.leaderboard.end(),
                   [](const CandidateScore& a, const CandidateScore& b) { return a.score < b.score; });
  for (std::size_t r = 0; r < result.leaderboard.size(); ++r) result.leaderboard[r].rank = r + 1;

  result.best = cfg.refit_winner && cfg.eval == EvalMode::holdout
                    ? fit_bank(data, best->spec, best->alphas)
                    : std::move(*best);
  return result;
}

}  // namespace pairnet
