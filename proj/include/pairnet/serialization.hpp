#pragma once

// JSON model artifacts.
//
// A bank is persisted with everything needed to resume incremental learning:
// partition, per-subspace status, parameters and sufficient statistics.
// Doubles are written in shortest round-trip form, so a reloaded bank
// predicts bitwise identically.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "pairnet/error.hpp"
#include "pairnet/trainer.hpp"

namespace pairnet::io {

using json = nlohmann::json;

inline constexpr int kFormatVersion = 1;
inline constexpr const char* kFormatName = "pairnet-model";

namespace detail {

inline json local_to_json(const LocalModel& l) {
  const auto& r = l.diagnostics.solve_report;
  return json{
      {"status", to_string(l.status)},
      {"count", l.stats.count},
      {"c", l.params.c},
      {"gamma", l.params.gamma},
      {"gram", std::vector<double>(l.stats.gram.data().begin(), l.stats.gram.data().end())},
      {"moment", l.stats.moment},
      {"sum_y", l.stats.sum_y},
      {"sum_y2", l.stats.sum_y2},
      {"diagnostics",
       {{"training_mse", l.diagnostics.training_mse},
        {"normal_residual", l.diagnostics.normal_residual},
        {"condition", linalg::to_string(r.flag)},
        {"ridge", r.ridge_applied},
        {"residual_inf_norm", r.residual_inf_norm}}}};
}

[[noreturn]] inline void schema_error(const std::string& what) {
  throw DataError("model artifact: " + what);
}

inline std::vector<double> finite_array(const json& j, const char* key, std::size_t expected) {
  if (!j.contains(key) || !j.at(key).is_array()) schema_error(std::string("missing array '") + key + "'");
  std::vector<double> v;
  for (const auto& e : j.at(key)) {
    if (!e.is_number()) schema_error(std::string("non-numeric or non-finite entry in '") + key + "'");
    v.push_back(e.get<double>());
  }
  if (v.size() != expected)
    schema_error(std::string("'") + key + "' has " + std::to_string(v.size()) + " entries, expected " +
                 std::to_string(expected));
  return v;
}

inline double finite_number(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number())
    schema_error(std::string("missing or non-finite number '") + key + "'");
  return j.at(key).get<double>();
}

inline void local_from_json(const json& j, LocalModel& l) {
  if (!j.is_object()) schema_error("subspace block must be an object");
  const std::size_t n = l.cfg.n();
  const std::size_t dim = param_count(n);
  try {
    l.status = fit_status_from_string(j.at("status").get<std::string>());
    l.stats.count = j.at("count").get<std::size_t>();
    const auto& d = j.at("diagnostics");
    l.diagnostics.training_mse = finite_number(d, "training_mse");
    l.diagnostics.normal_residual = finite_number(d, "normal_residual");
    l.diagnostics.solve_report.flag = linalg::condition_flag_from_string(d.at("condition").get<std::string>());
    l.diagnostics.solve_report.ridge_applied = finite_number(d, "ridge");
    l.diagnostics.solve_report.residual_inf_norm = finite_number(d, "residual_inf_norm");
  } catch (const json::exception& e) {
    schema_error(e.what());
  } catch (const ContractError& e) {
    schema_error(e.what());
  }
  l.params.n = n;
  l.params.c = finite_array(j, "c", fusion_count(n));
  l.params.gamma = finite_array(j, "gamma", fusion_count(n));
  const auto gram = finite_array(j, "gram", dim * dim);
  try {
    l.stats.gram = linalg::SymMatrix::from_rows(dim, gram);
  } catch (const ContractError&) {
    schema_error("gram matrix is not symmetric");
  }
  l.stats.moment = finite_array(j, "moment", dim);
  l.stats.sum_y = finite_number(j, "sum_y");
  l.stats.sum_y2 = finite_number(j, "sum_y2");
  if (l.status != FitStatus::empty && l.stats.count == 0) schema_error("non-empty status with zero count");
}

}  // namespace detail

inline json to_json(const ModelBank& bank) {
  json axes = json::array();
  for (const auto& a : bank.spec.axes()) axes.push_back({{"lo", a.lo}, {"hi", a.hi}, {"cuts", a.cuts}});
  json locals = json::array();
  for (const auto& l : bank.locals) locals.push_back(detail::local_to_json(l));
  return json{{"format", kFormatName},
              {"format_version", kFormatVersion},
              {"inputs", bank.inputs()},
              {"alphas", bank.alphas},
              {"partition", {{"axes", axes}, {"subspaces", bank.spec.subspace_count()}}},
              {"subspaces", locals},
              {"global_fallback", detail::local_to_json(bank.global_fallback)}};
}

inline ModelBank from_json(const json& j) {
  using detail::schema_error;
  if (!j.is_object()) schema_error("top level must be an object");
  if (!j.contains("format") || j.at("format") != kFormatName) schema_error("not a pairnet model");
  if (!j.contains("format_version") || !j.at("format_version").is_number_integer())
    schema_error("missing format_version");
  const int version = j.at("format_version").get<int>();
  if (version != kFormatVersion)
    schema_error("unsupported format_version " + std::to_string(version) + " (expected " +
                 std::to_string(kFormatVersion) + ")");

  ModelBank bank;
  try {
    const std::size_t n = j.at("inputs").get<std::size_t>();
    if (n < 1 || n > kMaxInputs) schema_error("inputs must be in [1, 7]");
    auto alphas = detail::finite_array(j, "alphas", n);
    std::vector<AxisGrid> axes;
    const auto& jaxes = j.at("partition").at("axes");
    if (!jaxes.is_array() || jaxes.size() != n) schema_error("partition must have one axis per input");
    for (const auto& ja : jaxes) {
      AxisGrid g;
      g.lo = detail::finite_number(ja, "lo");
      g.hi = detail::finite_number(ja, "hi");
      for (const auto& c : ja.at("cuts")) {
        if (!c.is_number()) schema_error("non-numeric cut");
        g.cuts.push_back(c.get<double>());
      }
      axes.push_back(std::move(g));
    }
    bank = make_bank(PartitionSpec(std::move(axes)), std::move(alphas));
    const auto& jl = j.at("subspaces");
    if (!jl.is_array() || jl.size() != bank.locals.size())
      schema_error("expected " + std::to_string(bank.locals.size()) + " subspace blocks");
    for (std::size_t k = 0; k < jl.size(); ++k) detail::local_from_json(jl[k], bank.locals[k]);
    detail::local_from_json(j.at("global_fallback"), bank.global_fallback);
  } catch (const json::exception& e) {
    schema_error(e.what());
  } catch (const ContractError& e) {
    schema_error(e.what());
  }
  return bank;
}

inline std::string dump(const ModelBank& bank) { return to_json(bank).dump(1) + "\n"; }

/// Writes `text` to `path` via a temporary file and rename.
inline void write_atomic(const std::filesystem::path& path, const std::string& text) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write '" + tmp.string() + "'");
    out << text;
    if (!out.flush()) throw DataError("write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw DataError("cannot rename '" + tmp.string() + "' to '" + path.string() + "': " + ec.message());
}

inline void save_model(const ModelBank& bank, const std::filesystem::path& path) {
  write_atomic(path, dump(bank));
}

inline ModelBank load_model_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("model artifact: ") + e.what());
  }
  return from_json(j);
}

inline ModelBank load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read model '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_model_text(buf.str());
}

}  // namespace pairnet::io
