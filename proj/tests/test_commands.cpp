#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "pairnet/commands.hpp"

using namespace pairnet;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

config::RunConfig quick(const std::string& out, std::optional<std::uint64_t> seed = std::nullopt) {
  auto cfg = config::load(std::string(PAIRNET_SOURCE_DIR) + "/samples/quick_synth.json", seed);
  cfg.output_dir = (fs::temp_directory_path() / "pairnet_commands_test" / out).string();
  return cfg;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

TEST(Commands, TrainWritesArtifactsAndSummary) {
  const auto cfg = quick("train");
  std::ostringstream os;
  const auto r = cli::cmd_train(cfg, os);
  EXPECT_TRUE(fs::exists(r.model_path));
  EXPECT_TRUE(fs::exists(fs::path(cfg.output_dir) / "train_summary.json"));
  EXPECT_EQ(r.bank.spec.subspace_count(), 8u);
  EXPECT_NE(os.str().find("PairNet_222"), std::string::npos);
  const auto summary = json::parse(slurp(fs::path(cfg.output_dir) / "train_summary.json"));
  EXPECT_EQ(summary["train_samples"], 700);
  EXPECT_DOUBLE_EQ(summary["training_mse"].get<double>(), r.training_mse);
}

TEST(Commands, SameSeedGivesByteIdenticalModels) {
  const auto a = cli::cmd_train(quick("same_a"), std::cout);
  const auto b = cli::cmd_train(quick("same_b"), std::cout);
  EXPECT_EQ(slurp(a.model_path), slurp(b.model_path));
  const auto c = cli::cmd_train(quick("same_c", 12345), std::cout);
  EXPECT_NE(slurp(a.model_path), slurp(c.model_path));
}

TEST(Commands, PartitionUsesTrainingRange) {
  const auto cfg = quick("range");
  const auto data = cli::load_data(cfg);
  const auto spec = cli::build_partition(cfg.partition, data.split);
  for (const auto& axis : spec.axes()) {
    EXPECT_EQ(axis.lo, data.split.train_min);
    EXPECT_EQ(axis.hi, data.split.train_max);
    ASSERT_EQ(axis.cuts.size(), 1u);
    EXPECT_DOUBLE_EQ(axis.cuts[0], 0.5 * (data.split.train_min + data.split.train_max));
  }
}

TEST(Commands, SelectWithSingleCandidate) {
  auto cfg = quick("select");
  cfg.search.candidates = 1;
  cfg.search.m_candidates = {{2}};
  cfg.search.grid_mode = GridMode::even;
  std::ostringstream os;
  const auto r = cli::cmd_select(cfg, os);
  EXPECT_EQ(r.search.leaderboard.size(), 2u);
  const auto board = json::parse(slurp(r.leaderboard_path));
  EXPECT_EQ(board["leaderboard"].size(), 2u);
  EXPECT_EQ(board["leaderboard"][0]["rank"], 1);
  EXPECT_EQ(io::dump(io::load_model(r.model_path)), io::dump(r.search.best));
}

TEST(Commands, SimulateReportIsConsistent) {
  const auto cfg = quick("simulate");
  std::ostringstream os;
  const auto report = cli::cmd_simulate(cfg, {}, os);
  ASSERT_EQ(report.rows.size(), 3u);
  for (const auto& row : report.rows) {
    ASSERT_EQ(row.cells.size(), 2u);
    EXPECT_EQ(row.cells[0].n, 50u);
    EXPECT_EQ(row.cells[1].n, 100u);
    if (row.kind == "pairnet") EXPECT_EQ(row.epochs, 1u);
    else EXPECT_EQ(row.epochs, 20u);
  }
  const auto j = json::parse(slurp(fs::path(cfg.output_dir) / "report.json"));
  ASSERT_EQ(j["rows"].size(), 3u);
  EXPECT_EQ(j["rows"][0]["name"], report.rows[0].name);
  EXPECT_EQ(j["rows"][0]["results"][1]["avg_mse"].get<double>(), report.rows[0].cells[1].avg_mse);
  EXPECT_EQ(slurp(fs::path(cfg.output_dir) / "report.txt"), os.str());
}

TEST(Commands, SimulatedPairNetMseMatchesDirectProtocol) {
  const auto cfg = quick("direct");
  const auto report = cli::cmd_simulate(cfg, {}, std::cout);
  const auto data = cli::load_data(cfg);
  const auto bank = fit_bank(data.split.train, cli::build_partition(cfg.pairnets[1], data.split));
  const auto sim = simulate_protocol(bank, make_stream(data.split.test, cfg.split.train_count), 100);
  EXPECT_EQ(report.rows[1].cells[1].avg_mse, sim.avg_mse);
  EXPECT_EQ(report.rows[1].cells[0].avg_mse, sim.prefix(50).avg_mse);
}

TEST(Commands, SimulateFromSavedArtifactMatchesConfiguredModel) {
  const auto cfg = quick("artifact");
  const auto trained = cli::cmd_train(cfg, std::cout);
  const auto from_file = cli::cmd_simulate(cfg, {trained.model_path.string()}, std::cout);
  ASSERT_EQ(from_file.rows.front().name, "model");
  const auto configured = cli::cmd_simulate(cfg, {}, std::cout);
  EXPECT_EQ(from_file.rows.front().cells[1].avg_mse, configured.rows[1].cells[1].avg_mse);
}

TEST(Commands, MemoryReportWithoutTraining) {
  auto cfg = config::load(std::string(PAIRNET_SOURCE_DIR) + "/samples/paper_regime_synth.json");
  std::ostringstream os;
  const auto report = cli::cmd_memory_report(cfg, {}, os);
  ASSERT_EQ(report.rows.size(), 4u);
  EXPECT_EQ(report.rows[2].parameter_bytes, 1024u);
  EXPECT_EQ(report.rows[3].parameter_bytes, 22408u);
  EXPECT_NE(os.str().find("1867"), std::string::npos);
}

TEST(Commands, ShortSeriesIsADataError) {
  auto cfg = quick("short");
  cfg.synth->length = 50;
  EXPECT_THROW(cli::cmd_train(cfg, std::cout), DataError);
  cfg = quick("missing_csv");
  cfg.synth.reset();
  cfg.csv = config::CsvSource{"/nonexistent/file.csv"};
  EXPECT_THROW(cli::cmd_train(cfg, std::cout), DataError);
}
