#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "pairnet/dataio.hpp"

using namespace pairnet;
using namespace pairnet::dataio;

TEST(ParseCsv, SkipsMissingValuesAndSortsByDate) {
  const std::string text =
      "DATE,DFF\n"
      "1954-07-03,1.00\n"
      "1954-07-01,0.80\n"
      "1954-07-02,.\n"
      "1954-07-04,\n"
      "1954-07-05,abc\n"
      "1954-07-02 ,1.20\r\n";
  const auto r = parse_csv_text(text, "DFF", "DATE");
  EXPECT_EQ(r.skipped_rows, 3u);
  ASSERT_EQ(r.series.size(), 3u);
  EXPECT_EQ(r.series.points[0], (Observation{"1954-07-01", 0.80}));
  EXPECT_EQ(r.series.points[1], (Observation{"1954-07-02", 1.20}));
  EXPECT_EQ(r.series.points[2], (Observation{"1954-07-03", 1.00}));
}

TEST(ParseCsv, ColumnsByHeaderNameAndBom) {
  const std::string text = "\xEF\xBB\xBF" "DATE,OTHER,DFF\n2000-01-01,9,1.5\n2000-01-02,9,2.5\n";
  const auto r = parse_csv_text(text, "DFF", "DATE");
  EXPECT_EQ(r.series.values(), (std::vector<double>{1.5, 2.5}));
  EXPECT_THROW(parse_csv_text(text, "RATE", "DATE"), DataError);
}

TEST(ParseCsv, RejectsDuplicatesEmptyAndMissingFile) {
  EXPECT_THROW(parse_csv_text("DATE,DFF\n2000-01-01,1\n2000-01-01,2\n", "DFF", "DATE"), DataError);
  EXPECT_THROW(parse_csv_text("", "DFF", "DATE"), DataError);
  EXPECT_THROW(parse_csv_text("DATE,DFF\n2000-01-01,.\n", "DFF", "DATE"), DataError);
  EXPECT_THROW(parse_csv("/nonexistent/path.csv", "DFF", "DATE"), DataError);
}

TEST(ParseCsv, FixtureFile) {
  const auto r = parse_csv(std::string(PAIRNET_SOURCE_DIR) + "/tests/data/tiny.csv", "DFF", "DATE");
  EXPECT_GE(r.skipped_rows, 1u);
  for (std::size_t i = 1; i < r.series.size(); ++i) EXPECT_LT(r.series.points[i - 1].date, r.series.points[i].date);
}

TEST(Window, ThreeLagExample) {
  const std::vector<double> v{1, 2, 3, 4, 5};
  const auto ds = window(v, 3);
  ASSERT_EQ(ds.samples.size(), 2u);
  EXPECT_EQ(ds.samples[0], (Sample{{1, 2, 3}, 4}));
  EXPECT_EQ(ds.samples[1], (Sample{{2, 3, 4}, 5}));
  EXPECT_EQ(ds.input_min, 1.0);
  EXPECT_EQ(ds.input_max, 4.0);
}

TEST(Window, ReconstructsTheSeries) {
  std::vector<double> v;
  for (int t = 0; t < 40; ++t) v.push_back(std::sin(0.3 * t));
  for (std::size_t n : {1u, 2u, 5u}) {
    const auto ds = window(v, n);
    EXPECT_EQ(ds.samples.size(), v.size() - n);
    std::vector<double> rebuilt(ds.samples.front().x);
    for (const auto& s : ds.samples) rebuilt.push_back(s.y);
    EXPECT_EQ(rebuilt, v);
  }
}

TEST(Window, TooShortOrZeroLength) {
  const std::vector<double> v{1, 2, 3};
  EXPECT_THROW(window(v, 3), DataError);
  EXPECT_THROW(window(v, 0), DataError);
}

TEST(Split, ChronologicalWithPrefixTestSets) {
  std::vector<double> v;
  for (int t = 0; t < 30; ++t) v.push_back(t);
  const auto ds = window(v, 2);  // 28 samples
  const auto s = split(ds, SplitPlan{20, {5, 8, 3}});
  ASSERT_EQ(s.train.size(), 20u);
  ASSERT_EQ(s.test.size(), 8u);
  EXPECT_EQ(s.train.back().y, 21.0);
  EXPECT_EQ(s.test.front().y, 22.0);
  EXPECT_EQ(s.train_min, 0.0);
  EXPECT_EQ(s.train_max, 20.0);
  EXPECT_THROW(split(ds, SplitPlan{21, {8}}), DataError);
  EXPECT_THROW(split(ds, SplitPlan{0, {1}}), DataError);
  EXPECT_THROW(split(ds, SplitPlan{5, {0}}), DataError);
}

TEST(Synth, WhiteNoiseAroundMeanWhenPhiIsZero) {
  SynthParams p;
  p.mean = 2.0;
  p.phi = 0.0;
  p.sigma = 0.5;
  p.start = 2.0;
  const auto v = synth_series(SynthKind::ar1, 20000, 3, p).values();
  double mean = 0.0, var = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  for (double x : v) var += (x - mean) * (x - mean);
  var /= static_cast<double>(v.size());
  EXPECT_NEAR(mean, 2.0, 0.02);
  EXPECT_NEAR(std::sqrt(var), 0.5, 0.02);
}

TEST(Synth, NoiselessSineIsExact) {
  SynthParams p;
  p.mean = 1.0;
  p.amplitude = 3.0;
  p.period = 8.0;
  p.sigma = 0.0;
  const auto ts = synth_series(SynthKind::sine_plus_noise, 16, 1, p);
  for (std::size_t t = 0; t < 16; ++t)
    EXPECT_DOUBLE_EQ(ts.points[t].value, 1.0 + 3.0 * std::sin(2.0 * std::numbers::pi * static_cast<double>(t) / 8.0));
}

TEST(Synth, DeterministicFlooredAndDated) {
  SynthParams p;
  p.sigma = 2.0;
  p.floor = 4.0;
  const auto a = synth_series(SynthKind::ar1, 500, 11, p);
  const auto b = synth_series(SynthKind::ar1, 500, 11, p);
  EXPECT_EQ(a.points, b.points);
  for (const auto& o : a.points) EXPECT_GE(o.value, 4.0);
  EXPECT_EQ(a.points.front().date, "1954-07-01");
  EXPECT_NE(synth_series(SynthKind::ar1, 500, 12, p).points, a.points);
  EXPECT_THROW(synth_series(SynthKind::ar1, 0, 1), DataError);
  EXPECT_THROW(synth_kind_from_string("garch"), ConfigError);
}

TEST(DayLabel, CalendarArithmetic) {
  EXPECT_EQ(day_label(0), "1954-07-01");
  EXPECT_EQ(day_label(31), "1954-08-01");
  EXPECT_EQ(day_label(184), "1955-01-01");
  // 1956 is a leap year: 1956-02-29 is 608 days after the origin.
  EXPECT_EQ(day_label(608), "1956-02-29");
  EXPECT_EQ(day_label(609), "1956-03-01");
}

TEST(DumpCsv, RoundTripsThroughTheParser) {
  const auto ts = synth_series(SynthKind::ar1, 50, 5);
  const auto back = parse_csv_text(dump_csv(ts, "DFF"), "DFF", "DATE");
  EXPECT_EQ(back.skipped_rows, 0u);
  EXPECT_EQ(back.series.points, ts.points);
}
