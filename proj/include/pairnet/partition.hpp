#pragma once

// Axis-aligned grid partition of the input box into M = prod m_i subspaces.
//
// Intervals are half-open [edge_t, edge_{t+1}) except the last, which is
// closed. Inputs outside [lo, hi] clamp to the first or last interval, so
// every finite point has exactly one subspace.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pairnet/error.hpp"
#include "pairnet/random.hpp"

namespace pairnet {

struct AxisGrid {
  double lo = 0.0;
  double hi = 1.0;
  std::vector<double> cuts;  // strictly increasing, inside (lo, hi)

  std::size_t intervals() const { return cuts.size() + 1; }

  double lower_edge(std::size_t t) const { return t == 0 ? lo : cuts[t - 1]; }
  double upper_edge(std::size_t t) const { return t == cuts.size() ? hi : cuts[t]; }

  void validate() const {
    if (!std::isfinite(lo) || !std::isfinite(hi) || !(hi > lo))
      throw ContractError("AxisGrid: need finite lo < hi");
    double prev = lo;
    for (double c : cuts) {
      if (!(c > prev)) throw ContractError("AxisGrid: cuts must be strictly increasing inside (lo, hi)");
      prev = c;
    }
    if (!cuts.empty() && !(cuts.back() < hi))
      throw ContractError("AxisGrid: cuts must lie below hi");
  }

  /// Interval index of a finite coordinate.
  std::size_t locate(double x) const {
    // First cut strictly greater than x marks the interval's right edge.
    auto it = std::upper_bound(cuts.begin(), cuts.end(), x);
    return static_cast<std::size_t>(it - cuts.begin());
  }

  friend bool operator==(const AxisGrid&, const AxisGrid&) = default;
};

struct SubspaceId {
  std::size_t flat = 0;
  std::vector<std::size_t> per_axis;

  friend bool operator==(const SubspaceId&, const SubspaceId&) = default;
};

class PartitionSpec {
public:
  PartitionSpec() = default;
  explicit PartitionSpec(std::vector<AxisGrid> axes) : axes_(std::move(axes)) {
    if (axes_.empty()) throw ContractError("PartitionSpec: need at least one axis");
    count_ = 1;
    for (const auto& a : axes_) {
      a.validate();
      count_ *= a.intervals();
    }
  }

  /// The trivial partition of [lo, hi]: one subspace.
  static PartitionSpec single(std::span<const double> lo, std::span<const double> hi) {
    detail::require(lo.size() == hi.size(), "PartitionSpec::single: length mismatch");
    std::vector<AxisGrid> axes;
    for (std::size_t i = 0; i < lo.size(); ++i) axes.push_back({lo[i], hi[i], {}});
    return PartitionSpec(std::move(axes));
  }

  std::size_t inputs() const { return axes_.size(); }
  std::size_t subspace_count() const { return count_; }
  const std::vector<AxisGrid>& axes() const { return axes_; }

  std::vector<double> lo() const {
    std::vector<double> v;
    for (const auto& a : axes_) v.push_back(a.lo);
    return v;
  }
  std::vector<double> hi() const {
    std::vector<double> v;
    for (const auto& a : axes_) v.push_back(a.hi);
    return v;
  }

  /// Mixed-radix encoding, axis 1 most significant.
  std::size_t flatten(std::span<const std::size_t> per_axis) const {
    detail::require(per_axis.size() == axes_.size(), "PartitionSpec::flatten: length mismatch");
    std::size_t flat = 0;
    for (std::size_t i = 0; i < axes_.size(); ++i) {
      detail::require(per_axis[i] < axes_[i].intervals(), "PartitionSpec::flatten: index out of range");
      flat = flat * axes_[i].intervals() + per_axis[i];
    }
    return flat;
  }

  SubspaceId unflatten(std::size_t flat) const {
    if (flat >= count_)
      throw ContractError("subspace id " + std::to_string(flat) + " out of range (M = " +
                          std::to_string(count_) + ")");
    SubspaceId id{flat, std::vector<std::size_t>(axes_.size())};
    for (std::size_t i = axes_.size(); i-- > 0;) {
      id.per_axis[i] = flat % axes_[i].intervals();
      flat /= axes_[i].intervals();
    }
    return id;
  }

  friend bool operator==(const PartitionSpec&, const PartitionSpec&) = default;

private:
  std::vector<AxisGrid> axes_;
  std::size_t count_ = 0;
};

inline SubspaceId locate(std::span<const double> x, const PartitionSpec& spec) {
  const auto& axes = spec.axes();
  if (x.size() != axes.size())
    throw ContractError("locate: expected " + std::to_string(axes.size()) + " inputs, got " +
                        std::to_string(x.size()));
  SubspaceId id{0, std::vector<std::size_t>(axes.size())};
  for (std::size_t i = 0; i < axes.size(); ++i) {
    if (!std::isfinite(x[i])) throw ContractError("locate: non-finite input");
    id.per_axis[i] = axes[i].locate(x[i]);
    id.flat = id.flat * axes[i].intervals() + id.per_axis[i];
  }
  return id;
}

struct Bounds {
  std::vector<double> lo;
  std::vector<double> hi;
};

inline Bounds subspace_bounds(std::size_t flat, const PartitionSpec& spec) {
  const auto id = spec.unflatten(flat);
  Bounds b;
  for (std::size_t i = 0; i < spec.inputs(); ++i) {
    const auto& a = spec.axes()[i];
    b.lo.push_back(a.lower_edge(id.per_axis[i]));
    b.hi.push_back(a.upper_edge(id.per_axis[i]));
  }
  return b;
}

inline Bounds subspace_bounds(const SubspaceId& id, const PartitionSpec& spec) {
  return subspace_bounds(id.flat, spec);
}

/// m equal-width intervals.
inline AxisGrid even_grid(double lo, double hi, std::size_t m) {
  if (m == 0) throw ContractError("even_grid: interval count must be at least 1");
  AxisGrid grid{lo, hi, {}};
  for (std::size_t t = 1; t < m; ++t)
    grid.cuts.push_back(lo + static_cast<double>(t) * (hi - lo) / static_cast<double>(m));
  grid.validate();
  return grid;
}

enum class GridMode { even, uniform, quantile };

inline const char* to_string(GridMode m) {
  switch (m) {
    case GridMode::even: return "even";
    case GridMode::uniform: return "uniform";
    case GridMode::quantile: return "quantile";
  }
  return "unknown";
}

inline GridMode grid_mode_from_string(const std::string& s) {
  if (s == "even") return GridMode::even;
  if (s == "uniform") return GridMode::uniform;
  if (s == "quantile") return GridMode::quantile;
  throw ConfigError("unknown grid mode '" + s + "' (expected even, uniform or quantile)");
}

/// m - 1 cuts drawn uniformly in (lo, hi), sorted. Draws closer than
/// 1e-9 (hi - lo) to a neighbour or an end are redrawn, a bounded number of times.
inline AxisGrid random_uniform_grid(double lo, double hi, std::size_t m, Rng& rng) {
  if (m == 0) throw ContractError("random_grid: interval count must be at least 1");
  AxisGrid grid{lo, hi, {}};
  const double min_gap = 1e-9 * (hi - lo);
  const std::size_t max_draws = 64 * m + 64;
  std::size_t draws = 0;
  while (grid.cuts.size() + 1 < m) {
    if (draws++ >= max_draws)
      throw ContractError("random_grid: cannot place " + std::to_string(m - 1) + " distinct cuts");
    const double c = rng.uniform(lo, hi);
    if (c - lo < min_gap || hi - c < min_gap) continue;
    auto it = std::lower_bound(grid.cuts.begin(), grid.cuts.end(), c);
    if (it != grid.cuts.end() && *it - c < min_gap) continue;
    if (it != grid.cuts.begin() && c - *(it - 1) < min_gap) continue;
    grid.cuts.insert(it, c);
  }
  grid.validate();
  return grid;
}

/// Linear-interpolation empirical quantile of sorted data, q in [0, 1].
inline double empirical_quantile(std::span<const double> sorted, double q) {
  detail::require(!sorted.empty(), "empirical_quantile: empty data");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

/// Cuts at the empirical t/m quantiles of the axis data.
inline AxisGrid quantile_grid(double lo, double hi, std::size_t m, std::span<const double> data) {
  if (m == 0) throw ContractError("random_grid: interval count must be at least 1");
  if (data.size() < m)
    throw ContractError("random_grid: quantile mode needs at least " + std::to_string(m) +
                        " data values, got " + std::to_string(data.size()));
  std::vector<double> sorted(data.begin(), data.end());
  std::sort(sorted.begin(), sorted.end());
  AxisGrid grid{lo, hi, {}};
  for (std::size_t t = 1; t < m; ++t) {
    const double c = empirical_quantile(sorted, static_cast<double>(t) / static_cast<double>(m));
    const double prev = grid.cuts.empty() ? lo : grid.cuts.back();
    if (!(c > prev) || !(c < hi))
      throw ContractError("random_grid: cannot place " + std::to_string(m - 1) +
                          " distinct quantile cuts (tied data)");
    grid.cuts.push_back(c);
  }
  return grid;
}

/// Grid generation for the random model search. `data` is the training data
/// projected on this axis (used by quantile mode only).
inline AxisGrid random_grid(double lo, double hi, std::size_t m, Rng& rng, GridMode mode,
                            std::span<const double> data = {}) {
  switch (mode) {
    case GridMode::even: return even_grid(lo, hi, m);
    case GridMode::uniform: return random_uniform_grid(lo, hi, m, rng);
    case GridMode::quantile: return quantile_grid(lo, hi, m, data);
  }
  throw ContractError("random_grid: bad mode");
}

/// Even grid with the given interval counts over a shared or per-axis box.
inline PartitionSpec even_partition(std::span<const double> lo, std::span<const double> hi,
                                    std::span<const std::size_t> intervals) {
  detail::require(lo.size() == hi.size() && lo.size() == intervals.size(),
                  "even_partition: length mismatch");
  std::vector<AxisGrid> axes;
  for (std::size_t i = 0; i < lo.size(); ++i) axes.push_back(even_grid(lo[i], hi[i], intervals[i]));
  return PartitionSpec(std::move(axes));
}

}  // namespace pairnet
