#pragma once

// Run configuration documents (JSON). Every object is checked against the
// keys it may hold; unknown keys and type mismatches raise ConfigError with
// the JSON pointer of the offending value.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pairnet/dataio.hpp"
#include "pairnet/error.hpp"
#include "pairnet/mlp.hpp"
#include "pairnet/partition.hpp"
#include "pairnet/selection.hpp"

namespace pairnet::config {

using json = nlohmann::json;

struct CsvSource {
  std::string path;
  std::string value_column = "DFF";
  std::string date_column = "DATE";
};

struct SynthSource {
  dataio::SynthKind kind = dataio::SynthKind::ar1;
  std::size_t length = 0;
  std::uint64_t seed = 0;
  dataio::SynthParams params;
};

struct PairNetSpec {
  std::string name;
  std::vector<std::size_t> intervals;
  GridMode mode = GridMode::even;
};

struct BaselineSpec {
  std::string name;
  mlp::MlpConfig mlp;           // mlp.epochs = pre-training epochs
  std::size_t finetune_epochs = 1000;
  std::size_t finetune_window = 1;
};

struct RunConfig {
  std::optional<CsvSource> csv;
  std::optional<SynthSource> synth;
  std::size_t window = 3;
  dataio::SplitPlan split;
  std::vector<double> alphas;
  PairNetSpec partition{"PairNet", {}, GridMode::even};
  SearchConfig search;
  std::vector<PairNetSpec> pairnets;
  std::vector<BaselineSpec> baselines;
  std::string output_dir = "out";
  std::uint64_t seed = 0;
  bool dump_dataset = false;
};

namespace detail {

/// Reads one JSON object, remembering which keys were consumed.
class Reader {
public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail("expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  const json& raw(const std::string& key) {
    if (!j_.contains(key)) fail("missing required key", key);
    seen_.insert(key);
    return j_.at(key);
  }

  std::string where(const std::string& key) const { return path_ + "/" + key; }

  [[noreturn]] void fail(const std::string& what, const std::string& key = "") const {
    const std::string at = key.empty() ? path_ : where(key);
    throw ConfigError("config " + (at.empty() ? std::string("/") : at) + ": " + what);
  }

  std::string str(const std::string& key) {
    const auto& v = raw(key);
    if (!v.is_string()) fail("expected a string", key);
    return v.get<std::string>();
  }

  double num(const std::string& key) {
    const auto& v = raw(key);
    if (!v.is_number()) fail("expected a number", key);
    return v.get<double>();
  }

  std::size_t count(const std::string& key) {
    const auto& v = raw(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
      fail("expected a non-negative integer", key);
    return v.get<std::size_t>();
  }

  std::uint64_t u64(const std::string& key) {
    const auto& v = raw(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
      fail("expected an unsigned integer", key);
    return v.get<std::uint64_t>();
  }

  bool boolean(const std::string& key) {
    const auto& v = raw(key);
    if (!v.is_boolean()) fail("expected true or false", key);
    return v.get<bool>();
  }

  std::vector<double> numbers(const std::string& key) {
    const auto& v = raw(key);
    if (!v.is_array()) fail("expected an array of numbers", key);
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number()) fail("expected an array of numbers", key);
      out.push_back(e.get<double>());
    }
    return out;
  }

  std::vector<std::size_t> counts(const std::string& key) {
    const auto& v = raw(key);
    if (!v.is_array()) fail("expected an array of non-negative integers", key);
    std::vector<std::size_t> out;
    for (const auto& e : v) {
      if (!e.is_number_unsigned() && !(e.is_number_integer() && e.get<long long>() >= 0))
        fail("expected an array of non-negative integers", key);
      out.push_back(e.get<std::size_t>());
    }
    return out;
  }

  Reader object(const std::string& key) { return Reader(raw(key), where(key)); }

  /// Rejects keys that were never consumed.
  void finish() const {
    for (const auto& [key, value] : j_.items())
      if (!seen_.count(key)) fail("unknown key", key);
  }

private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

inline PairNetSpec read_pairnet(Reader r, const std::string& default_name) {
  PairNetSpec p;
  p.name = r.has("name") ? r.str("name") : default_name;
  if (!r.has("intervals")) r.fail("missing 'intervals'");
  p.intervals = r.counts("intervals");
  for (auto m : p.intervals)
    if (m < 1) r.fail("interval counts must be at least 1", "intervals");
  if (r.has("mode")) {
    p.mode = grid_mode_from_string(r.str("mode"));
    if (p.mode == GridMode::uniform) r.fail("fixed partitions support 'even' or 'quantile'", "mode");
  }
  r.finish();
  if (p.name.empty()) {
    p.name = "PairNet_";
    for (auto m : p.intervals) p.name += std::to_string(m);
  }
  return p;
}

inline BaselineSpec read_baseline(Reader r, std::size_t index, std::uint64_t seed) {
  BaselineSpec b;
  b.mlp.seed = derive_seed(seed, 1000 + index);
  if (r.has("hidden_layers")) b.mlp.hidden_layers = r.count("hidden_layers");
  if (r.has("neurons_per_layer")) b.mlp.neurons_per_layer = r.count("neurons_per_layer");
  if (r.has("activation")) b.mlp.activation = mlp::activation_from_string(r.str("activation"));
  if (r.has("optimizer")) b.mlp.optimizer.kind = mlp::optimizer_from_string(r.str("optimizer"));
  if (r.has("lr")) b.mlp.optimizer.lr = r.num("lr");
  if (r.has("pretrain_epochs")) b.mlp.epochs = r.count("pretrain_epochs");
  if (r.has("batch_size")) b.mlp.batch_size = r.count("batch_size");
  if (r.has("seed")) b.mlp.seed = r.u64("seed");
  if (r.has("finetune_epochs")) b.finetune_epochs = r.count("finetune_epochs");
  if (r.has("finetune_window")) b.finetune_window = r.count("finetune_window");
  b.name = r.has("name") ? r.str("name") : "ANN_IL-" + std::to_string(b.finetune_epochs);
  r.finish();
  b.mlp.validate();
  if (b.finetune_window < 1) r.fail("finetune_window must be at least 1");
  return b;
}

}  // namespace detail

/// Validates and converts a parsed document. `seed_override` replaces the
/// document's seed before any seed-derived value is computed.
inline RunConfig from_json(const json& doc, std::optional<std::uint64_t> seed_override = std::nullopt) {
  using detail::Reader;
  Reader root(doc, "");
  RunConfig cfg;
  if (root.has("seed")) cfg.seed = root.u64("seed");
  if (seed_override) cfg.seed = *seed_override;

  if (!root.has("dataset")) root.fail("missing 'dataset'");
  {
    Reader ds = root.object("dataset");
    if (ds.has("csv") == ds.has("synth")) ds.fail("give exactly one of 'csv' or 'synth'");
    if (ds.has("csv")) {
      Reader c = ds.object("csv");
      CsvSource src;
      src.path = c.str("path");
      if (c.has("value_column")) src.value_column = c.str("value_column");
      if (c.has("date_column")) src.date_column = c.str("date_column");
      c.finish();
      cfg.csv = src;
    } else {
      Reader s = ds.object("synth");
      SynthSource src;
      if (s.has("kind")) src.kind = dataio::synth_kind_from_string(s.str("kind"));
      src.length = s.count("length");
      src.seed = s.has("seed") ? s.u64("seed") : cfg.seed;
      if (s.has("params")) {
        Reader p = s.object("params");
        auto& sp = src.params;
        if (p.has("mean")) sp.mean = p.num("mean");
        if (p.has("phi")) sp.phi = p.num("phi");
        if (p.has("sigma")) sp.sigma = p.num("sigma");
        if (p.has("start")) sp.start = p.num("start");
        if (p.has("floor")) sp.floor = p.num("floor");
        if (p.has("amplitude")) sp.amplitude = p.num("amplitude");
        if (p.has("period")) sp.period = p.num("period");
        p.finish();
      }
      s.finish();
      cfg.synth = src;
    }
    ds.finish();
  }

  if (root.has("window")) cfg.window = root.count("window");
  if (cfg.window < 1 || cfg.window > kMaxInputs) root.fail("window must be in [1, 7]", "window");

  if (!root.has("split")) root.fail("missing 'split'");
  {
    Reader s = root.object("split");
    cfg.split.train_count = s.count("train_count");
    cfg.split.test_counts = s.has("test_counts") ? s.counts("test_counts") : std::vector<std::size_t>{};
    s.finish();
    if (cfg.split.train_count == 0) s.fail("train_count must be positive");
    for (auto c : cfg.split.test_counts)
      if (c == 0) s.fail("test counts must be positive", "test_counts");
  }

  if (root.has("alphas")) {
    cfg.alphas = root.numbers("alphas");
    if (cfg.alphas.size() != cfg.window) root.fail("need one alpha per input", "alphas");
    double sum = 0.0;
    for (double a : cfg.alphas) {
      if (!(a >= 0.0 && a <= 1.0)) root.fail("alphas must lie in [0, 1]", "alphas");
      sum += a;
    }
    if (std::abs(sum - 1.0) > 1e-12) root.fail("alphas must sum to 1", "alphas");
  }

  auto check_arity = [&](const PairNetSpec& p, const std::string& where) {
    if (p.intervals.size() != cfg.window)
      throw ConfigError(where + ": need one interval count per input (" + std::to_string(cfg.window) + ")");
  };

  if (root.has("partition")) {
    cfg.partition = detail::read_pairnet(root.object("partition"), "");
    check_arity(cfg.partition, "/partition");
  } else {
    cfg.partition.intervals.assign(cfg.window, 1);
    cfg.partition.name = "PairNet_" + std::string(cfg.window, '1');
  }

  cfg.search.seed = cfg.seed;
  cfg.search.alphas = cfg.alphas;
  if (root.has("search")) {
    Reader s = root.object("search");
    if (s.has("K")) cfg.search.candidates = s.count("K");
    if (s.has("m_candidates")) {
      const auto& arr = s.raw("m_candidates");
      if (!arr.is_array() || arr.empty()) s.fail("expected a non-empty array of arrays", "m_candidates");
      cfg.search.m_candidates.clear();
      for (const auto& e : arr) {
        if (!e.is_array()) s.fail("expected a non-empty array of arrays", "m_candidates");
        std::vector<std::size_t> set;
        for (const auto& m : e) {
          if (!m.is_number_unsigned() && !(m.is_number_integer() && m.get<long long>() >= 0))
            s.fail("interval counts must be non-negative integers", "m_candidates");
          set.push_back(m.get<std::size_t>());
        }
        cfg.search.m_candidates.push_back(std::move(set));
      }
    }
    if (s.has("grid_mode")) cfg.search.grid_mode = grid_mode_from_string(s.str("grid_mode"));
    if (s.has("eval")) {
      const auto e = s.str("eval");
      if (e == "train_mse") cfg.search.eval = EvalMode::train_mse;
      else if (e == "holdout") cfg.search.eval = EvalMode::holdout;
      else s.fail("expected 'train_mse' or 'holdout'", "eval");
    }
    if (s.has("holdout_fraction")) cfg.search.holdout_fraction = s.num("holdout_fraction");
    if (s.has("refit_winner")) cfg.search.refit_winner = s.boolean("refit_winner");
    s.finish();
    try {
      cfg.search.validate(cfg.window);
    } catch (const ConfigError& e) {
      throw ConfigError(std::string("/search: ") + e.what());
    }
  }

  if (root.has("pairnets")) {
    const auto& arr = root.raw("pairnets");
    if (!arr.is_array()) root.fail("expected an array", "pairnets");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const auto where = "/pairnets/" + std::to_string(i);
      cfg.pairnets.push_back(detail::read_pairnet(Reader(arr[i], where), ""));
      check_arity(cfg.pairnets.back(), where);
    }
  }

  if (root.has("baselines")) {
    const auto& arr = root.raw("baselines");
    if (!arr.is_array()) root.fail("expected an array", "baselines");
    for (std::size_t i = 0; i < arr.size(); ++i)
      cfg.baselines.push_back(detail::read_baseline(Reader(arr[i], "/baselines/" + std::to_string(i)), i, cfg.seed));
  }

  if (root.has("output_dir")) cfg.output_dir = root.str("output_dir");
  if (root.has("dump_dataset")) cfg.dump_dataset = root.boolean("dump_dataset");
  root.finish();
  return cfg;
}

inline RunConfig parse(const std::string& text, std::optional<std::uint64_t> seed_override = std::nullopt) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return from_json(doc, seed_override);
}

inline RunConfig load(const std::filesystem::path& path, std::optional<std::uint64_t> seed_override = std::nullopt) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), seed_override);
}

}  // namespace pairnet::config
