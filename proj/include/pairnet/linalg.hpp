#pragma once

// Small dense symmetric solver for the PairNet normal equations.
//
// Gram matrices here are at most 256 x 256 (seven inputs) and are singular
// for every input count: the 2^n fusion weights span only the affine
// functions of g, so plain Cholesky is expected to fail and the ridge ladder
// is the common path, not the exceptional one.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "pairnet/error.hpp"

namespace pairnet::linalg {

/// Dense symmetric matrix, full row-major storage. Mutations go through
/// symmetric paths so that a(i, j) == a(j, i) holds bitwise.
class SymMatrix {
public:
  SymMatrix() = default;
  explicit SymMatrix(std::size_t dim) : dim_(dim), data_(dim * dim, 0.0) {}

  static SymMatrix identity(std::size_t dim) {
    SymMatrix m(dim);
    for (std::size_t i = 0; i < dim; ++i) m.data_[i * dim + i] = 1.0;
    return m;
  }

  /// Builds from a row-major array; throws if it is not exactly symmetric.
  static SymMatrix from_rows(std::size_t dim, std::span<const double> rows) {
    pairnet::detail::require(rows.size() == dim * dim, "SymMatrix::from_rows: size mismatch");
    SymMatrix m(dim);
    for (std::size_t i = 0; i < dim; ++i)
      for (std::size_t j = 0; j < dim; ++j) {
        pairnet::detail::require(rows[i * dim + j] == rows[j * dim + i],
                        "SymMatrix::from_rows: input is not symmetric");
        m.data_[i * dim + j] = rows[i * dim + j];
      }
    return m;
  }

  std::size_t dim() const { return dim_; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * dim_ + j]; }

  /// Sets both (i, j) and (j, i).
  void set(std::size_t i, std::size_t j, double v) {
    data_[i * dim_ + j] = v;
    data_[j * dim_ + i] = v;
  }

  void add_to_diagonal(double v) {
    for (std::size_t i = 0; i < dim_; ++i) data_[i * dim_ + i] += v;
  }

  std::span<const double> data() const { return data_; }

  double trace() const {
    double t = 0.0;
    for (std::size_t i = 0; i < dim_; ++i) t += data_[i * dim_ + i];
    return t;
  }

  double max_diagonal() const {
    double m = 0.0;
    for (std::size_t i = 0; i < dim_; ++i) m = std::max(m, data_[i * dim_ + i]);
    return m;
  }

  bool is_zero() const {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return v == 0.0; });
  }

  friend bool operator==(const SymMatrix&, const SymMatrix&) = default;

private:
  std::size_t dim_ = 0;
  std::vector<double> data_;
};

enum class ConditionFlag { clean, regularized, fallback_minimum_norm };

inline const char* to_string(ConditionFlag f) {
  switch (f) {
    case ConditionFlag::clean: return "clean";
    case ConditionFlag::regularized: return "regularized";
    case ConditionFlag::fallback_minimum_norm: return "fallback_minimum_norm";
  }
  return "unknown";
}

inline ConditionFlag condition_flag_from_string(const std::string& s) {
  if (s == "clean") return ConditionFlag::clean;
  if (s == "regularized") return ConditionFlag::regularized;
  if (s == "fallback_minimum_norm") return ConditionFlag::fallback_minimum_norm;
  throw ContractError("unknown condition flag '" + s + "'");
}

struct SolveReport {
  double ridge_applied = 0.0;  // zero iff flag == clean
  ConditionFlag flag = ConditionFlag::clean;
  double residual_inf_norm = 0.0;  // against the unregularized matrix

  friend bool operator==(const SolveReport&, const SolveReport&) = default;
};

struct Solution {
  std::vector<double> x;
  SolveReport report;
};

/// Solver thresholds. The defaults are the documented contract.
struct SolveOptions {
  double pivot_tolerance = 1e-12;   // relative to the largest diagonal entry
  double ridge_base = 1e-10;        // times max(trace/dim, 1)
  double ridge_growth = 100.0;
  int max_ridge_retries = 4;
  int max_refinement_steps = 10;
  double rank_tolerance = 1e-12;    // pivoted minimum-norm fallback
};

/// A <- A + phi phi^T, b <- b + y phi.
inline void rank1_update(SymMatrix& a, std::span<double> b, std::span<const double> phi,
                         double y) {
  const std::size_t n = a.dim();
  if (b.size() != n || phi.size() != n)
    throw ContractError("rank1_update: dimension mismatch (A is " + std::to_string(n) +
                        ", b is " + std::to_string(b.size()) + ", phi is " +
                        std::to_string(phi.size()) + ")");
  for (std::size_t i = 0; i < n; ++i) {
    const double pi = phi[i];
    for (std::size_t j = i; j < n; ++j) {
      const double v = pi * phi[j];
      a.set(i, j, a(i, j) + v);
    }
    b[i] += y * pi;
  }
}

/// y = A x
inline std::vector<double> multiply(const SymMatrix& a, std::span<const double> x) {
  const std::size_t n = a.dim();
  pairnet::detail::require(x.size() == n, "multiply: dimension mismatch");
  std::vector<double> y(n, 0.0);
  const auto d = a.data();
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += d[i * n + j] * x[j];
    y[i] = s;
  }
  return y;
}

inline double inf_norm(std::span<const double> v) {
  double m = 0.0;
  for (double e : v) m = std::max(m, std::abs(e));
  return m;
}

/// ||A x - b||_inf
inline double residual_inf_norm(const SymMatrix& a, std::span<const double> x,
                                std::span<const double> b) {
  auto ax = multiply(a, x);
  double m = 0.0;
  for (std::size_t i = 0; i < ax.size(); ++i) m = std::max(m, std::abs(ax[i] - b[i]));
  return m;
}

namespace detail {

/// Lower-triangular Cholesky factor, row-major dim x dim.
struct Cholesky {
  std::size_t dim = 0;
  std::vector<double> l;

  std::vector<double> solve(std::span<const double> b) const {
    std::vector<double> y(b.begin(), b.end());
    for (std::size_t i = 0; i < dim; ++i) {
      double s = y[i];
      for (std::size_t k = 0; k < i; ++k) s -= l[i * dim + k] * y[k];
      y[i] = s / l[i * dim + i];
    }
    for (std::size_t i = dim; i-- > 0;) {
      double s = y[i];
      for (std::size_t k = i + 1; k < dim; ++k) s -= l[k * dim + i] * y[k];
      y[i] = s / l[i * dim + i];
    }
    return y;
  }
};

/// Returns false when a pivot falls at or below `tol`.
inline bool cholesky(const SymMatrix& a, double ridge, double tol, Cholesky& out) {
  const std::size_t n = a.dim();
  out.dim = n;
  out.l.assign(n * n, 0.0);
  auto& l = out.l;
  for (std::size_t j = 0; j < n; ++j) {
    double d = a(j, j) + ridge;
    for (std::size_t k = 0; k < j; ++k) d -= l[j * n + k] * l[j * n + k];
    if (!(d > tol)) return false;
    const double ljj = std::sqrt(d);
    l[j * n + j] = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l[i * n + k] * l[j * n + k];
      l[i * n + j] = s / ljj;
    }
  }
  return true;
}

/// Minimum-norm solution of a symmetric positive semidefinite system via
/// diagonally pivoted Cholesky: A = P L L^T P^T with L of full column rank r,
/// so A^+ = P L (L^T L)^{-2} L^T P^T.
inline std::vector<double> pivoted_minimum_norm(const SymMatrix& a, std::span<const double> b,
                                                double rank_tol) {
  const std::size_t n = a.dim();
  std::vector<double> work(a.data().begin(), a.data().end());
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  const double threshold = rank_tol * std::max(a.max_diagonal(), 0.0);

  // Column-major n x r factor in permuted coordinates.
  std::vector<std::vector<double>> cols;
  auto at = [&](std::size_t i, std::size_t j) -> double& { return work[i * n + j]; };
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (at(i, i) > at(p, p)) p = i;
    if (!(at(p, p) > threshold)) break;
    if (p != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(at(k, j), at(p, j));
      for (std::size_t i = 0; i < n; ++i) std::swap(at(i, k), at(i, p));
      std::swap(perm[k], perm[p]);
      for (auto& c : cols) std::swap(c[k], c[p]);
    }
    std::vector<double> col(n, 0.0);
    const double pivot = std::sqrt(at(k, k));
    col[k] = pivot;
    for (std::size_t i = k + 1; i < n; ++i) col[i] = at(i, k) / pivot;
    // Schur complement update of the trailing block.
    for (std::size_t i = k + 1; i < n; ++i)
      for (std::size_t j = k + 1; j < n; ++j) at(i, j) -= col[i] * col[j];
    cols.push_back(std::move(col));
  }

  const std::size_t r = cols.size();
  std::vector<double> x(n, 0.0);
  if (r == 0) return x;

  // c = L^T P^T b
  std::vector<double> c(r, 0.0);
  for (std::size_t q = 0; q < r; ++q)
    for (std::size_t i = 0; i < n; ++i) c[q] += cols[q][i] * b[perm[i]];

  SymMatrix g(r);
  for (std::size_t p = 0; p < r; ++p)
    for (std::size_t q = p; q < r; ++q) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += cols[p][i] * cols[q][i];
      g.set(p, q, s);
    }
  Cholesky gf;
  if (!cholesky(g, 0.0, 0.0, gf)) return x;
  auto z = gf.solve(gf.solve(c));

  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t q = 0; q < r; ++q) s += cols[q][i] * z[q];
    x[perm[i]] = s;
  }
  return x;
}

}  // namespace detail

/// Solves A x = b for symmetric positive semidefinite A.
///
/// Plain Cholesky first. If a pivot drops to tolerance, Cholesky of A + lambda I
/// is retried on a ladder lambda = 1e-10 * max(trace/dim, 1) * 100^k, k < 4,
/// and the ridge solution is polished by iterative refinement against the
/// unregularized A. When the ladder is exhausted the minimum-norm solution
/// from pivoted elimination is returned. Never throws on singular input.
inline Solution solve_spd(const SymMatrix& a, std::span<const double> b,
                          const SolveOptions& opt = {}) {
  const std::size_t n = a.dim();
  if (n == 0 || b.size() != n)
    throw ContractError("solve_spd: dimension mismatch (A is " + std::to_string(n) +
                        ", b is " + std::to_string(b.size()) + ")");

  Solution out;
  const double tol = opt.pivot_tolerance * a.max_diagonal();
  detail::Cholesky factor;

  if (detail::cholesky(a, 0.0, tol, factor)) {
    out.x = factor.solve(b);
    out.report.flag = ConditionFlag::clean;
    out.report.residual_inf_norm = residual_inf_norm(a, out.x, b);
    return out;
  }

  double ridge = opt.ridge_base * std::max(a.trace() / static_cast<double>(n), 1.0);
  for (int attempt = 0; attempt < opt.max_ridge_retries; ++attempt, ridge *= opt.ridge_growth) {
    if (!detail::cholesky(a, ridge, tol, factor)) continue;
    std::vector<double> x = factor.solve(b);
    double res = residual_inf_norm(a, x, b);
    for (int step = 0; step < opt.max_refinement_steps && res > 0.0; ++step) {
      auto ax = multiply(a, x);
      std::vector<double> r(n);
      for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - ax[i];
      auto dx = factor.solve(r);
      std::vector<double> trial(x);
      for (std::size_t i = 0; i < n; ++i) trial[i] += dx[i];
      const double trial_res = residual_inf_norm(a, trial, b);
      if (!(trial_res < res)) break;
      x = std::move(trial);
      res = trial_res;
    }
    out.x = std::move(x);
    out.report = {ridge, ConditionFlag::regularized, res};
    return out;
  }

  out.x = detail::pivoted_minimum_norm(a, b, opt.rank_tolerance);
  out.report.flag = ConditionFlag::fallback_minimum_norm;
  out.report.ridge_applied = ridge / opt.ridge_growth;
  out.report.residual_inf_norm = residual_inf_norm(a, out.x, b);
  return out;
}

}  // namespace pairnet::linalg
