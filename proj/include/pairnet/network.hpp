#pragma once

// The four-layer PairNet forward pass.
//
// Index convention for the 2^n fusion neurons: write k (0-based) in binary
// with input 1 on the most significant bit. A 0 bit selects g_i, a 1 bit
// selects 1 - g_i. So k = 0 blends every g and k = 2^n - 1 every complement.

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "pairnet/error.hpp"

namespace pairnet {

inline constexpr std::size_t kMaxInputs = 7;

/// Number of fusion neurons for n inputs.
constexpr std::size_t fusion_count(std::size_t n) { return std::size_t{1} << n; }

/// Number of trainable parameters (c and gamma) for n inputs.
constexpr std::size_t param_count(std::size_t n) { return std::size_t{2} << n; }

/// Layer 1/2 configuration of one local network: the blend weights and the
/// input box the linear-ramp activations normalize against.
struct ActivationConfig {
  std::vector<double> alphas;
  std::vector<double> lo;
  std::vector<double> hi;

  std::size_t n() const { return alphas.size(); }

  static std::vector<double> equal_alphas(std::size_t n) {
    return std::vector<double>(n, 1.0 / static_cast<double>(n));
  }

  static ActivationConfig make(std::vector<double> lo, std::vector<double> hi) {
    const std::size_t n = lo.size();
    ActivationConfig cfg{equal_alphas(n), std::move(lo), std::move(hi)};
    cfg.validate();
    return cfg;
  }

  void validate() const {
    const std::size_t n = alphas.size();
    if (n < 1 || n > kMaxInputs)
      throw ContractError("ActivationConfig: input count must be in [1, 7], got " +
                          std::to_string(n));
    if (lo.size() != n || hi.size() != n)
      throw ContractError("ActivationConfig: alphas, lo and hi lengths differ");
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!(alphas[i] >= 0.0 && alphas[i] <= 1.0))
        throw ContractError("ActivationConfig: alpha outside [0, 1]");
      if (!std::isfinite(lo[i]) || !std::isfinite(hi[i]) || !(hi[i] > lo[i]))
        throw ContractError("ActivationConfig: need finite lo < hi on every input");
      sum += alphas[i];
    }
    if (std::abs(sum - 1.0) > 1e-12)
      throw ContractError("ActivationConfig: alphas must sum to 1");
  }
};

/// Trainable parameters of one local network: c_k and gamma_k, k < 2^n.
struct PairNetParams {
  std::size_t n = 0;
  std::vector<double> c;
  std::vector<double> gamma;

  static PairNetParams zeros(std::size_t n) {
    return {n, std::vector<double>(fusion_count(n), 0.0),
            std::vector<double>(fusion_count(n), 0.0)};
  }

  /// Splits a stacked (c || gamma) vector.
  static PairNetParams from_stacked(std::size_t n, std::span<const double> p) {
    if (p.size() != param_count(n)) throw ContractError("PairNetParams: stacked size mismatch");
    const std::size_t k = fusion_count(n);
    return {n, {p.begin(), p.begin() + static_cast<std::ptrdiff_t>(k)},
            {p.begin() + static_cast<std::ptrdiff_t>(k), p.end()}};
  }

  std::vector<double> stacked() const {
    std::vector<double> p(c);
    p.insert(p.end(), gamma.begin(), gamma.end());
    return p;
  }

  void validate() const {
    if (c.size() != fusion_count(n) || gamma.size() != fusion_count(n))
      throw ContractError("PairNetParams: expected 2^n entries in c and gamma");
    for (std::size_t k = 0; k < c.size(); ++k)
      if (!std::isfinite(c[k]) || !std::isfinite(gamma[k]))
        throw ContractError("PairNetParams: non-finite parameter");
  }

  friend bool operator==(const PairNetParams&, const PairNetParams&) = default;
};

/// Every intermediate value of one forward evaluation.
struct ForwardTrace {
  std::vector<double> g;
  std::vector<double> gbar;
  std::vector<double> w;
  std::vector<double> beta;
  std::vector<double> theta;
  std::vector<double> ybar;
  double f = 0.0;
};

struct Layer1Output {
  std::vector<double> g;
  std::vector<double> gbar;
};

/// Complementary neuron pairs: linear ramp over [lo, hi], clamped to [0, 1].
inline Layer1Output layer1(std::span<const double> x, const ActivationConfig& cfg) {
  const std::size_t n = cfg.n();
  if (x.size() != n)
    throw ContractError("layer1: expected " + std::to_string(n) + " inputs, got " +
                        std::to_string(x.size()));
  Layer1Output out{std::vector<double>(n), std::vector<double>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(x[i])) throw ContractError("layer1: non-finite input");
    double g = (x[i] - cfg.lo[i]) / (cfg.hi[i] - cfg.lo[i]);
    g = g < 0.0 ? 0.0 : (g > 1.0 ? 1.0 : g);
    out.g[i] = g;
    out.gbar[i] = 1.0 - g;
  }
  return out;
}

/// w_k = sum_i alpha_i s_i(k), s_i(k) = g_i or 1 - g_i by bit (n-1-i) of k.
inline std::vector<double> fusion_weights(std::span<const double> g, std::span<const double> gbar,
                                          std::span<const double> alphas) {
  const std::size_t n = alphas.size();
  detail::require(g.size() == n && gbar.size() == n, "fusion_weights: length mismatch");
  const std::size_t count = fusion_count(n);
  std::vector<double> w(count, 0.0);
  for (std::size_t k = 0; k < count; ++k) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const bool complement = (k >> (n - 1 - i)) & 1U;
      s += alphas[i] * (complement ? gbar[i] : g[i]);
    }
    w[k] = s;
  }
  return w;
}

namespace detail {

inline void fill_beta_theta(std::size_t n, std::span<const double> w, std::vector<double>& beta,
                            std::vector<double>& theta) {
  const double half_count = static_cast<double>(fusion_count(n) >> 1);
  beta.resize(w.size());
  theta.resize(w.size());
  for (std::size_t k = 0; k < w.size(); ++k) {
    beta[k] = w[k] / half_count;
    theta[k] = (1.0 - w[k]) / 2.0;
  }
}

}  // namespace detail

/// Writes the regression features (beta || beta*theta) into `phi`, so that
/// f = phi . (c || gamma). `phi` must hold 2^(n+1) entries.
inline void feature_vector(std::span<const double> x, const ActivationConfig& cfg,
                           std::span<double> phi) {
  const std::size_t n = cfg.n();
  const std::size_t count = fusion_count(n);
  detail::require(phi.size() == 2 * count, "feature_vector: output size mismatch");
  const auto l1 = layer1(x, cfg);
  const auto w = fusion_weights(l1.g, l1.gbar, cfg.alphas);
  const double half_count = static_cast<double>(count >> 1);
  for (std::size_t k = 0; k < count; ++k) {
    const double beta = w[k] / half_count;
    const double theta = (1.0 - w[k]) / 2.0;
    phi[k] = beta;
    phi[count + k] = beta * theta;
  }
}

inline std::vector<double> feature_vector(std::span<const double> x, const ActivationConfig& cfg) {
  std::vector<double> phi(param_count(cfg.n()));
  feature_vector(x, cfg, phi);
  return phi;
}

/// Features from a trace that already holds beta and theta.
inline std::vector<double> feature_vector(const ForwardTrace& trace) {
  std::vector<double> phi(trace.beta);
  for (std::size_t k = 0; k < trace.beta.size(); ++k) phi.push_back(trace.beta[k] * trace.theta[k]);
  return phi;
}

inline ForwardTrace forward(std::span<const double> x, const ActivationConfig& cfg,
                            const PairNetParams& params) {
  const std::size_t n = cfg.n();
  if (params.n != n)
    throw ContractError("forward: config has " + std::to_string(n) +
                        " inputs but parameters have " + std::to_string(params.n));
  params.validate();
  ForwardTrace t;
  auto l1 = layer1(x, cfg);
  t.g = std::move(l1.g);
  t.gbar = std::move(l1.gbar);
  t.w = fusion_weights(t.g, t.gbar, cfg.alphas);
  detail::fill_beta_theta(n, t.w, t.beta, t.theta);
  t.ybar.resize(t.w.size());
  double f = 0.0;
  for (std::size_t k = 0; k < t.w.size(); ++k) {
    t.ybar[k] = params.c[k] + t.theta[k] * params.gamma[k];
    f += t.beta[k] * t.ybar[k];
  }
  t.f = f;
  return t;
}

/// Prediction only.
inline double evaluate(std::span<const double> x, const ActivationConfig& cfg,
                       const PairNetParams& params) {
  return forward(x, cfg, params).f;
}

struct Decomposition {
  double linear_part = 0.0;     // sum beta_k c_k
  double nonlinear_part = 0.0;  // sum beta_k theta_k gamma_k
};

inline Decomposition decompose(const ForwardTrace& trace, const PairNetParams& params) {
  detail::require(trace.beta.size() == params.c.size(), "decompose: size mismatch");
  Decomposition d;
  for (std::size_t k = 0; k < trace.beta.size(); ++k) {
    d.linear_part += trace.beta[k] * params.c[k];
    d.nonlinear_part += trace.beta[k] * trace.theta[k] * params.gamma[k];
  }
  return d;
}

}  // namespace pairnet
