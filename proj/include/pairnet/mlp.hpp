#pragma once

// Fully connected regression network trained by backpropagation: the
// gradient-descent baseline the PairNet is compared against.
//
// Inputs and target are z-scored with constants from the training data and
// the loss is the mean squared error in standardized units.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "pairnet/dataset.hpp"
#include "pairnet/error.hpp"
#include "pairnet/random.hpp"

namespace pairnet::mlp {

enum class Activation { tanh, relu };
enum class OptimizerKind { sgd, adam };

inline const char* to_string(Activation a) { return a == Activation::tanh ? "tanh" : "relu"; }
inline const char* to_string(OptimizerKind o) { return o == OptimizerKind::sgd ? "sgd" : "adam"; }

inline Activation activation_from_string(const std::string& s) {
  if (s == "tanh") return Activation::tanh;
  if (s == "relu") return Activation::relu;
  throw ConfigError("unknown activation '" + s + "' (expected tanh or relu)");
}

inline OptimizerKind optimizer_from_string(const std::string& s) {
  if (s == "sgd") return OptimizerKind::sgd;
  if (s == "adam") return OptimizerKind::adam;
  throw ConfigError("unknown optimizer '" + s + "' (expected sgd or adam)");
}

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::adam;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct MlpConfig {
  std::size_t hidden_layers = 2;
  std::size_t neurons_per_layer = 50;
  Activation activation = Activation::tanh;
  OptimizerConfig optimizer;
  std::size_t epochs = 20;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;

  void validate() const {
    if (hidden_layers < 1) throw ConfigError("mlp: hidden_layers must be at least 1");
    if (neurons_per_layer < 1) throw ConfigError("mlp: neurons_per_layer must be at least 1");
    if (batch_size < 1) throw ConfigError("mlp: batch_size must be at least 1");
    if (!(optimizer.lr > 0.0) || !std::isfinite(optimizer.lr))
      throw ConfigError("mlp: learning rate must be positive");
  }

  std::string describe() const {
    std::ostringstream os;
    os << hidden_layers << "x" << neurons_per_layer << " " << to_string(activation) << ", "
       << to_string(optimizer.kind) << "(lr=" << optimizer.lr << "), epochs=" << epochs
       << ", batch=" << batch_size << ", seed=" << seed;
    return os.str();
  }
};

/// Dense layer, weights row-major [out][in].
struct Layer {
  std::size_t in = 0;
  std::size_t out = 0;
  std::vector<double> w;
  std::vector<double> b;

  Layer() = default;
  Layer(std::size_t in_, std::size_t out_) : in(in_), out(out_), w(in_ * out_, 0.0), b(out_, 0.0) {}

  std::size_t size() const { return w.size() + b.size(); }
  friend bool operator==(const Layer&, const Layer&) = default;
};

struct MlpModel {
  std::size_t inputs = 0;
  Activation activation = Activation::tanh;
  std::vector<Layer> layers;  // hidden layers then a 1-unit linear output
  std::vector<double> x_mean, x_std;
  double y_mean = 0.0;
  double y_std = 1.0;

  std::size_t parameter_count() const {
    std::size_t k = 0;
    for (const auto& l : layers) k += l.size();
    return k;
  }

  friend bool operator==(const MlpModel&, const MlpModel&) = default;
};

/// Zero-initialized model with identity normalization.
inline MlpModel make_model(std::size_t inputs, const MlpConfig& cfg) {
  cfg.validate();
  pairnet::detail::require(inputs >= 1, "mlp: need at least one input");
  MlpModel m;
  m.inputs = inputs;
  m.activation = cfg.activation;
  std::size_t prev = inputs;
  for (std::size_t h = 0; h < cfg.hidden_layers; ++h) {
    m.layers.emplace_back(prev, cfg.neurons_per_layer);
    prev = cfg.neurons_per_layer;
  }
  m.layers.emplace_back(prev, 1);
  m.x_mean.assign(inputs, 0.0);
  m.x_std.assign(inputs, 1.0);
  return m;
}

/// Glorot-uniform weights, zero biases.
inline void initialize(MlpModel& m, Rng& rng) {
  for (auto& l : m.layers) {
    const double limit = std::sqrt(6.0 / static_cast<double>(l.in + l.out));
    for (auto& v : l.w) v = rng.uniform(-limit, limit);
    std::fill(l.b.begin(), l.b.end(), 0.0);
  }
}

inline void set_normalization(MlpModel& m, std::span<const Sample> data) {
  const std::size_t n = m.inputs;
  const double count = static_cast<double>(data.size());
  std::vector<double> mean(n, 0.0), sq(n, 0.0);
  double ym = 0.0, ysq = 0.0;
  for (const auto& s : data) {
    for (std::size_t i = 0; i < n; ++i) mean[i] += s.x[i];
    ym += s.y;
  }
  for (auto& v : mean) v /= count;
  ym /= count;
  for (const auto& s : data) {
    for (std::size_t i = 0; i < n; ++i) sq[i] += (s.x[i] - mean[i]) * (s.x[i] - mean[i]);
    ysq += (s.y - ym) * (s.y - ym);
  }
  m.x_mean = mean;
  m.x_std.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double sd = std::sqrt(sq[i] / count);
    m.x_std[i] = sd > 0.0 ? sd : 1.0;
  }
  m.y_mean = ym;
  const double ysd = std::sqrt(ysq / count);
  m.y_std = ysd > 0.0 ? ysd : 1.0;
}

namespace detail {

inline double activate(Activation a, double z) { return a == Activation::tanh ? std::tanh(z) : (z > 0.0 ? z : 0.0); }

/// Derivative expressed through the activation output (tanh) or input (relu).
inline double activate_grad(Activation a, double z, double out) {
  return a == Activation::tanh ? 1.0 - out * out : (z > 0.0 ? 1.0 : 0.0);
}

/// Forward pass on standardized inputs, keeping every layer's pre- and
/// post-activation for backprop.
struct Workspace {
  std::vector<std::vector<double>> z;  // per layer pre-activation
  std::vector<std::vector<double>> a;  // a[0] = input, a[l+1] = layer l output
};

inline double forward_standardized(const MlpModel& m, std::span<const double> xs, Workspace& ws) {
  const std::size_t depth = m.layers.size();
  ws.z.resize(depth);
  ws.a.resize(depth + 1);
  ws.a[0].assign(xs.begin(), xs.end());
  for (std::size_t l = 0; l < depth; ++l) {
    const Layer& layer = m.layers[l];
    auto& z = ws.z[l];
    auto& out = ws.a[l + 1];
    z.resize(layer.out);
    out.resize(layer.out);
    const auto& in = ws.a[l];
    const bool hidden = l + 1 < depth;
    for (std::size_t r = 0; r < layer.out; ++r) {
      double s = layer.b[r];
      const double* row = &layer.w[r * layer.in];
      for (std::size_t c = 0; c < layer.in; ++c) s += row[c] * in[c];
      z[r] = s;
      out[r] = hidden ? activate(m.activation, s) : s;
    }
  }
  return ws.a[depth][0];
}

inline void standardize(const MlpModel& m, std::span<const double> x, std::vector<double>& xs) {
  xs.resize(m.inputs);
  for (std::size_t i = 0; i < m.inputs; ++i) xs[i] = (x[i] - m.x_mean[i]) / m.x_std[i];
}

/// Accumulates d(loss)/d(params) for one sample given d(loss)/d(output).
inline void backward(const MlpModel& m, const Workspace& ws, double dout, std::vector<Layer>& grad,
                     std::vector<double>& delta, std::vector<double>& prev_delta) {
  const std::size_t depth = m.layers.size();
  delta.assign(1, dout);
  for (std::size_t l = depth; l-- > 0;) {
    const Layer& layer = m.layers[l];
    Layer& g = grad[l];
    const auto& in = ws.a[l];
    for (std::size_t r = 0; r < layer.out; ++r) {
      const double d = delta[r];
      g.b[r] += d;
      double* grow = &g.w[r * layer.in];
      for (std::size_t c = 0; c < layer.in; ++c) grow[c] += d * in[c];
    }
    if (l == 0) break;
    prev_delta.assign(layer.in, 0.0);
    for (std::size_t r = 0; r < layer.out; ++r) {
      const double d = delta[r];
      const double* row = &layer.w[r * layer.in];
      for (std::size_t c = 0; c < layer.in; ++c) prev_delta[c] += row[c] * d;
    }
    for (std::size_t c = 0; c < layer.in; ++c)
      prev_delta[c] *= activate_grad(m.activation, ws.z[l - 1][c], ws.a[l][c]);
    std::swap(delta, prev_delta);
  }
}

inline std::vector<Layer> zero_like(const std::vector<Layer>& layers) {
  std::vector<Layer> g;
  g.reserve(layers.size());
  for (const auto& l : layers) g.emplace_back(l.in, l.out);
  return g;
}

}  // namespace detail

inline double mlp_predict(const MlpModel& m, std::span<const double> x) {
  pairnet::detail::require(x.size() == m.inputs, "mlp_predict: input count mismatch");
  std::vector<double> xs;
  detail::standardize(m, x, xs);
  detail::Workspace ws;
  return detail::forward_standardized(m, xs, ws) * m.y_std + m.y_mean;
}

struct LossGradient {
  double loss = 0.0;          // mean squared error, standardized units
  std::vector<Layer> grad;    // same shapes as the model layers
};

/// Batch loss and its exact gradient.
inline LossGradient loss_and_gradient(const MlpModel& m, std::span<const Sample> batch) {
  pairnet::detail::require(!batch.empty(), "loss_and_gradient: empty batch");
  LossGradient out{0.0, detail::zero_like(m.layers)};
  detail::Workspace ws;
  std::vector<double> xs, delta, prev;
  const double scale = 1.0 / static_cast<double>(batch.size());
  for (const auto& s : batch) {
    detail::standardize(m, s.x, xs);
    const double pred = detail::forward_standardized(m, xs, ws);
    const double err = pred - (s.y - m.y_mean) / m.y_std;
    out.loss += err * err * scale;
    detail::backward(m, ws, 2.0 * err * scale, out.grad, delta, prev);
  }
  return out;
}

inline double loss(const MlpModel& m, std::span<const Sample> batch) {
  pairnet::detail::require(!batch.empty(), "loss: empty batch");
  detail::Workspace ws;
  std::vector<double> xs;
  double total = 0.0;
  for (const auto& s : batch) {
    detail::standardize(m, s.x, xs);
    const double err = detail::forward_standardized(m, xs, ws) - (s.y - m.y_mean) / m.y_std;
    total += err * err;
  }
  return total / static_cast<double>(batch.size());
}

/// Plain SGD or Adam over the layer parameters.
class Optimizer {
public:
  Optimizer() = default;
  Optimizer(const OptimizerConfig& cfg, const MlpModel& m)
      : cfg_(cfg), m_(detail::zero_like(m.layers)), v_(detail::zero_like(m.layers)) {}

  void step(MlpModel& model, const std::vector<Layer>& grad) {
    ++t_;
    const double lr = cfg_.lr;
    if (cfg_.kind == OptimizerKind::sgd) {
      for (std::size_t l = 0; l < model.layers.size(); ++l) {
        auto& layer = model.layers[l];
        for (std::size_t i = 0; i < layer.w.size(); ++i) layer.w[i] -= lr * grad[l].w[i];
        for (std::size_t i = 0; i < layer.b.size(); ++i) layer.b[i] -= lr * grad[l].b[i];
      }
      return;
    }
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    auto apply = [&](std::vector<double>& p, const std::vector<double>& g, std::vector<double>& m,
                     std::vector<double>& v) {
      for (std::size_t i = 0; i < p.size(); ++i) {
        m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g[i];
        v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g[i] * g[i];
        p[i] -= lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + cfg_.eps);
      }
    };
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
      apply(model.layers[l].w, grad[l].w, m_[l].w, v_[l].w);
      apply(model.layers[l].b, grad[l].b, m_[l].b, v_[l].b);
    }
  }

private:
  OptimizerConfig cfg_;
  std::vector<Layer> m_, v_;
  std::uint64_t t_ = 0;
};

/// Mini-batch training loop with persistent optimizer and shuffle streams, so
/// train(E1) followed by train(E2) equals train(E1 + E2).
class Trainer {
public:
  Trainer(std::span<const Sample> data, const MlpConfig& cfg)
      : cfg_(cfg), data_(data.begin(), data.end()), rng_(cfg.seed) {
    cfg.validate();
    if (data_.empty()) throw DataError("mlp_train: empty training data");
    model_ = make_model(data_.front().x.size(), cfg);
    for (const auto& s : data_)
      if (s.x.size() != model_.inputs || !s.finite())
        throw DataError("mlp_train: training samples must be finite with consistent input count");
    initialize(model_, rng_);
    set_normalization(model_, data_);
    optimizer_ = Optimizer(cfg.optimizer, model_);
    order_.resize(data_.size());
    std::iota(order_.begin(), order_.end(), std::size_t{0});
  }

  /// Runs `epochs` passes; returns the mean training loss of the last one.
  double train(std::size_t epochs) {
    double last = 0.0;
    Dataset batch;
    for (std::size_t e = 0; e < epochs; ++e) {
      shuffle(order_, rng_);
      double total = 0.0;
      for (std::size_t start = 0; start < order_.size(); start += cfg_.batch_size) {
        const std::size_t stop = std::min(order_.size(), start + cfg_.batch_size);
        batch.clear();
        for (std::size_t i = start; i < stop; ++i) batch.push_back(data_[order_[i]]);
        auto lg = loss_and_gradient(model_, batch);
        if (!std::isfinite(lg.loss))
          throw DegenerateError("mlp_train: loss diverged (" + cfg_.describe() + ")");
        total += lg.loss * static_cast<double>(batch.size());
        optimizer_.step(model_, lg.grad);
      }
      last = total / static_cast<double>(order_.size());
    }
    return last;
  }

  const MlpModel& model() const { return model_; }
  MlpModel take_model() && { return std::move(model_); }

private:
  MlpConfig cfg_;
  Dataset data_;
  Rng rng_;
  MlpModel model_;
  Optimizer optimizer_;
  std::vector<std::size_t> order_;
};

inline MlpModel mlp_train(std::span<const Sample> data, const MlpConfig& cfg) {
  Trainer t(data, cfg);
  t.train(cfg.epochs);
  return std::move(t).take_model();
}

/// `epochs` gradient steps on `batch` (a single new sample in the default
/// regime) with a fresh optimizer state.
inline void mlp_fine_tune(MlpModel& m, std::span<const Sample> batch, std::size_t epochs,
                          const OptimizerConfig& opt) {
  for (const auto& s : batch)
    if (s.x.size() != m.inputs || !s.finite())
      throw ContractError("mlp_fine_tune: non-finite or mis-sized sample rejected");
  if (epochs == 0 || batch.empty()) return;
  Optimizer optimizer(opt, m);
  for (std::size_t e = 0; e < epochs; ++e) {
    auto lg = loss_and_gradient(m, batch);
    optimizer.step(m, lg.grad);
  }
}

inline void mlp_fine_tune(MlpModel& m, const Sample& d, std::size_t epochs, const OptimizerConfig& opt) {
  mlp_fine_tune(m, std::span<const Sample>(&d, 1), epochs, opt);
}

}  // namespace pairnet::mlp
