#pragma once

#include <stdexcept>
#include <string>

namespace pairnet {

/// Violated precondition on a library call (dimension mismatch, bad index).
class ContractError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Invalid run configuration or CLI usage. Maps to exit code 2.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Unusable input data: unreadable files, non-finite values, infeasible splits.
/// Maps to exit code 3.
class DataError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Every candidate model was numerically degenerate. Maps to exit code 4.
class DegenerateError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool cond, const std::string& what) {
  if (!cond) throw ContractError(what);
}

}  // namespace detail
}  // namespace pairnet
