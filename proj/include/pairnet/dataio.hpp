#pragma once

// Time-series ingestion and sliding-window datasets.
//
// Expected input is a headed CSV such as the FRED export of the effective
// federal funds rate (DATE,DFF or observation_date,DFF). Rows whose value is
// missing or non-numeric (FRED writes ".") are skipped and counted.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "pairnet/dataset.hpp"
#include "pairnet/error.hpp"
#include "pairnet/random.hpp"

namespace pairnet::dataio {

struct Observation {
  std::string date;  // ISO-8601, so lexical order is chronological
  double value = 0.0;

  friend bool operator==(const Observation&, const Observation&) = default;
};

struct TimeSeries {
  std::vector<Observation> points;

  std::size_t size() const { return points.size(); }
  std::vector<double> values() const {
    std::vector<double> v;
    v.reserve(points.size());
    for (const auto& p : points) v.push_back(p.value);
    return v;
  }
};

struct ParseResult {
  TimeSeries series;
  std::size_t skipped_rows = 0;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '"')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '"'))
    s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline bool parse_double(std::string_view s, double& out) {
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

}  // namespace detail

/// Parses CSV text. Columns are looked up by header name.
inline ParseResult parse_csv_text(std::string_view text, const std::string& value_column,
                                  const std::string& date_column) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto nl = text.find('\n', start);
    const auto line = text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
    if (!detail::trim(line).empty()) lines.push_back(line);
    if (nl == std::string_view::npos) break;
    start = nl + 1;
  }
  if (lines.empty()) throw DataError("parse_csv: empty input");

  auto header = detail::split_fields(lines.front());
  if (!header.empty() && header.front().starts_with("\xEF\xBB\xBF")) header.front().remove_prefix(3);
  auto column = [&](const std::string& name) {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw DataError("parse_csv: column '" + name + "' not found in header");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t vcol = column(value_column);
  const std::size_t dcol = column(date_column);

  ParseResult result;
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto fields = detail::split_fields(lines[r]);
    double v = 0.0;
    if (fields.size() <= std::max(vcol, dcol) || fields[dcol].empty() ||
        !detail::parse_double(fields[vcol], v)) {
      ++result.skipped_rows;
      continue;
    }
    result.series.points.push_back({std::string(fields[dcol]), v});
  }
  if (result.series.points.empty()) throw DataError("parse_csv: no valid rows");

  auto& pts = result.series.points;
  std::stable_sort(pts.begin(), pts.end(),
                   [](const Observation& a, const Observation& b) { return a.date < b.date; });
  for (std::size_t i = 1; i < pts.size(); ++i)
    if (pts[i].date == pts[i - 1].date) throw DataError("parse_csv: duplicate date " + pts[i].date);
  return result;
}

inline ParseResult parse_csv(const std::string& path, const std::string& value_column,
                             const std::string& date_column) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("parse_csv: cannot read '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv_text(buf.str(), value_column, date_column);
}

struct WindowedDataset {
  std::size_t n = 0;
  Dataset samples;
  double input_min = 0.0;
  double input_max = 0.0;
};

/// Min/max over every input component.
inline std::pair<double, double> input_range(std::span<const Sample> samples) {
  if (samples.empty()) throw DataError("input_range: empty dataset");
  double lo = samples.front().x.front();
  double hi = lo;
  for (const auto& s : samples)
    for (double v : s.x) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  return {lo, hi};
}

/// n consecutive values predict the next one.
inline WindowedDataset window(std::span<const double> values, std::size_t n) {
  if (n < 1) throw DataError("window: window length must be at least 1");
  if (values.size() <= n)
    throw DataError("window: series of length " + std::to_string(values.size()) +
                    " is too short for window " + std::to_string(n));
  WindowedDataset ds;
  ds.n = n;
  ds.samples.reserve(values.size() - n);
  for (std::size_t t = n; t < values.size(); ++t)
    ds.samples.push_back({{values.begin() + static_cast<std::ptrdiff_t>(t - n),
                           values.begin() + static_cast<std::ptrdiff_t>(t)},
                          values[t]});
  std::tie(ds.input_min, ds.input_max) = input_range(ds.samples);
  return ds;
}

inline WindowedDataset window(const TimeSeries& series, std::size_t n) { return window(series.values(), n); }

struct SplitPlan {
  std::size_t train_count = 0;
  std::vector<std::size_t> test_counts;

  std::size_t max_test() const {
    return test_counts.empty() ? 0 : *std::max_element(test_counts.begin(), test_counts.end());
  }
};

struct Split {
  Dataset train;
  Dataset test;  // max(test_counts) samples; shorter test sets are its prefixes
  double train_min = 0.0;
  double train_max = 0.0;
};

/// Chronological split: first train_count samples, then the test block.
inline Split split(const WindowedDataset& ds, const SplitPlan& plan) {
  if (plan.train_count == 0) throw DataError("split: train_count must be positive");
  for (auto c : plan.test_counts)
    if (c == 0) throw DataError("split: test counts must be positive");
  if (plan.train_count + plan.max_test() > ds.samples.size())
    throw DataError("split: plan needs " + std::to_string(plan.train_count + plan.max_test()) +
                    " samples but the dataset has " + std::to_string(ds.samples.size()));
  Split s;
  const auto first = ds.samples.begin();
  s.train.assign(first, first + static_cast<std::ptrdiff_t>(plan.train_count));
  s.test.assign(first + static_cast<std::ptrdiff_t>(plan.train_count),
                first + static_cast<std::ptrdiff_t>(plan.train_count + plan.max_test()));
  std::tie(s.train_min, s.train_max) = input_range(s.train);
  return s;
}

enum class SynthKind { ar1, sine_plus_noise };

inline SynthKind synth_kind_from_string(const std::string& s) {
  if (s == "ar1") return SynthKind::ar1;
  if (s == "sine_plus_noise") return SynthKind::sine_plus_noise;
  throw ConfigError("unknown synthetic series kind '" + s + "' (expected ar1 or sine_plus_noise)");
}

inline const char* to_string(SynthKind k) { return k == SynthKind::ar1 ? "ar1" : "sine_plus_noise"; }

/// Generator parameters. ar1: v_t = mean + phi (v_{t-1} - mean) + sigma e_t,
/// started at `start`, optionally floored. sine_plus_noise:
/// v_t = mean + amplitude sin(2 pi t / period) + sigma e_t.
struct SynthParams {
  double mean = 5.0;
  double phi = 0.999;
  double sigma = 0.1;
  double start = 5.0;
  double floor = -std::numeric_limits<double>::infinity();
  double amplitude = 1.0;
  double period = 50.0;
};

/// ISO date `offset` days after 1954-07-01 (proleptic Gregorian).
inline std::string day_label(std::size_t offset) {
  // Days since 1970-01-01 to civil date.
  long long z = -5663 + static_cast<long long>(offset) + 719468;
  const long long era = (z >= 0 ? z : z - 146096) / 146097;
  const long long doe = z - era * 146097;
  const long long yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const long long doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const long long mp = (5 * doy + 2) / 153;
  const long long d = doy - (153 * mp + 2) / 5 + 1;
  const long long m = mp < 10 ? mp + 3 : mp - 9;
  const long long y = yoe + era * 400 + (m <= 2 ? 1 : 0);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04lld-%02lld-%02lld", y, m, d);
  return buf;
}

/// Deterministic synthetic series with consecutive ISO dates from 1954-07-01.
inline TimeSeries synth_series(SynthKind kind, std::size_t length, std::uint64_t seed,
                               const SynthParams& p = {}) {
  if (length == 0) throw DataError("synth_series: length must be positive");
  Rng rng(seed);
  TimeSeries ts;
  ts.points.reserve(length);
  double v = p.start;
  for (std::size_t t = 0; t < length; ++t) {
    if (kind == SynthKind::ar1) {
      if (t > 0) v = p.mean + p.phi * (v - p.mean) + p.sigma * rng.normal();
      v = std::max(v, p.floor);
    } else {
      const double noise = p.sigma > 0.0 ? p.sigma * rng.normal() : 0.0;
      v = p.mean + p.amplitude * std::sin(2.0 * std::numbers::pi * static_cast<double>(t) / p.period) + noise;
    }
    ts.points.push_back({day_label(t), v});
  }
  return ts;
}

/// Writes DATE,VALUE rows with round-trip precision.
inline std::string dump_csv(const TimeSeries& ts, const std::string& value_column = "VALUE") {
  std::ostringstream os;
  os.precision(17);
  os << "DATE," << value_column << "\n";
  for (const auto& p : ts.points) os << p.date << "," << p.value << "\n";
  return os.str();
}

}  // namespace pairnet::dataio
