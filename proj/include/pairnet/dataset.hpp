#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace pairnet {

/// One input/target pair.
struct Sample {
  std::vector<double> x;
  double y = 0.0;

  bool finite() const {
    if (!std::isfinite(y)) return false;
    for (double v : x)
      if (!std::isfinite(v)) return false;
    return true;
  }

  friend bool operator==(const Sample&, const Sample&) = default;
};

using Dataset = std::vector<Sample>;

}  // namespace pairnet
