#ifndef UAL_NN_HPP
#define UAL_NN_HPP

// Dense feedforward networks with inverted dropout, Adam, L2 weight decay,
// weighted cross-entropy and focal loss. Everything runs in double precision.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "ual/error.hpp"
#include "ual/matrix.hpp"
#include "ual/random.hpp"

namespace ual {

enum class Activation : std::uint32_t {
  identity = 0,
  relu = 1,
  leaky_relu = 2,
  sigmoid = 3,
  softmax = 4,
};

inline std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::identity: return "identity";
    case Activation::relu: return "relu";
    case Activation::leaky_relu: return "leaky_relu";
    case Activation::sigmoid: return "sigmoid";
    case Activation::softmax: return "softmax";
  }
  return "unknown";
}

inline Activation parse_activation(std::string_view name) {
  for (auto a : {Activation::identity, Activation::relu, Activation::leaky_relu,
                 Activation::sigmoid, Activation::softmax}) {
    if (to_string(a) == name) return a;
  }
  throw ArgumentError("unknown activation '" + std::string(name) + "'");
}

inline constexpr double kDefaultLeakySlope = 0.01;

/// One dense layer. The dropout mask is applied to the layer's *input*, so a
/// rate on layer i+1 is dropout after layer i's activation.
struct LayerSpec {
  std::size_t input_width = 0;
  std::size_t output_width = 0;
  Activation activation = Activation::identity;
  double leaky_slope = kDefaultLeakySlope;
  double dropout_rate = 0.0;

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

/// Weights are output_width x input_width; biases are 1 x output_width.
struct Parameters {
  std::vector<RealMatrix> weights;
  std::vector<RealMatrix> biases;

  friend bool operator==(const Parameters&, const Parameters&) = default;
};

inline Parameters zeros_like(const Parameters& p) {
  Parameters z;
  for (const auto& w : p.weights) z.weights.emplace_back(w.rows(), w.cols());
  for (const auto& b : p.biases) z.biases.emplace_back(b.rows(), b.cols());
  return z;
}

inline bool same_shapes(const Parameters& a, const Parameters& b) {
  if (a.weights.size() != b.weights.size() || a.biases.size() != b.biases.size()) return false;
  for (std::size_t i = 0; i < a.weights.size(); ++i) {
    if (a.weights[i].rows() != b.weights[i].rows() || a.weights[i].cols() != b.weights[i].cols())
      return false;
  }
  for (std::size_t i = 0; i < a.biases.size(); ++i) {
    if (a.biases[i].rows() != b.biases[i].rows() || a.biases[i].cols() != b.biases[i].cols())
      return false;
  }
  return true;
}

struct AdamOptions {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  Parameters first_moment;
  Parameters second_moment;
  std::uint64_t step = 0;

  friend bool operator==(const AdamState&, const AdamState&) = default;
};

class Network {
 public:
  /// Zero biases, weights ~ N(0, 2 / input_width).
  Network(std::vector<LayerSpec> layers, std::uint64_t seed) : layers_(std::move(layers)), seed_(seed) {
    validate_layers(layers_);
    reinitialize(seed);
  }

  Network(std::vector<LayerSpec> layers, Parameters params, std::uint64_t seed = 0)
      : layers_(std::move(layers)), params_(std::move(params)), seed_(seed) {
    validate_layers(layers_);
    if (params_.weights.size() != layers_.size() || params_.biases.size() != layers_.size()) {
      throw ShapeError("parameter count does not match layer count");
    }
    for (std::size_t i = 0; i < layers_.size(); ++i) {
      const auto& l = layers_[i];
      const auto& w = params_.weights[i];
      const auto& b = params_.biases[i];
      if (w.rows() != l.output_width || w.cols() != l.input_width || b.rows() != 1 ||
          b.cols() != l.output_width) {
        throw ShapeError("parameters of layer " + std::to_string(i) + " do not match its widths");
      }
      if (!all_finite(w.data()) || !all_finite(b.data())) {
        throw NumericError("non-finite parameter in layer " + std::to_string(i));
      }
    }
    reset_optimizer();
  }

  void reinitialize(std::uint64_t seed) {
    seed_ = seed;
    Rng rng(seed);
    params_ = Parameters{};
    for (const auto& l : layers_) {
      std::normal_distribution<double> normal(0.0, std::sqrt(2.0 / static_cast<double>(l.input_width)));
      RealMatrix w(l.output_width, l.input_width);
      for (double& v : w.data()) v = normal(rng);
      params_.weights.push_back(std::move(w));
      params_.biases.emplace_back(1, l.output_width);
    }
    reset_optimizer();
  }

  void reset_optimizer() {
    optimizer_.first_moment = zeros_like(params_);
    optimizer_.second_moment = zeros_like(params_);
    optimizer_.step = 0;
  }

  const std::vector<LayerSpec>& layers() const noexcept { return layers_; }
  std::size_t depth() const noexcept { return layers_.size(); }
  std::size_t input_width() const noexcept { return layers_.front().input_width; }
  std::size_t output_width() const noexcept { return layers_.back().output_width; }

  /// Width of the class-probability vector, or 0 if the head is not a classifier.
  std::size_t class_count() const noexcept {
    const auto& last = layers_.back();
    if (last.activation == Activation::softmax) return last.output_width;
    if (last.activation == Activation::sigmoid && last.output_width == 1) return 2;
    return 0;
  }

  const Parameters& parameters() const noexcept { return params_; }
  Parameters& parameters() noexcept { return params_; }
  const AdamState& optimizer_state() const noexcept { return optimizer_; }
  AdamState& optimizer_state() noexcept { return optimizer_; }
  std::uint64_t seed() const noexcept { return seed_; }

  void set_dropout(std::size_t layer, double rate) {
    check_dropout(rate);
    layers_.at(layer).dropout_rate = rate;
  }

  /// Dropout on the input of every layer after the first.
  void set_hidden_dropout(double rate) {
    check_dropout(rate);
    for (std::size_t i = 1; i < layers_.size(); ++i) layers_[i].dropout_rate = rate;
  }

  friend bool operator==(const Network&, const Network&) = default;

 private:
  static void check_dropout(double rate) {
    if (!(rate >= 0.0 && rate < 1.0)) {
      throw ArgumentError("dropout rate must be in [0, 1), got " + std::to_string(rate));
    }
  }

  static void validate_layers(const std::vector<LayerSpec>& layers) {
    if (layers.empty()) throw ArgumentError("network needs at least one layer");
    for (std::size_t i = 0; i < layers.size(); ++i) {
      const auto& l = layers[i];
      if (l.input_width == 0 || l.output_width == 0) {
        throw ArgumentError("layer " + std::to_string(i) + " has zero width");
      }
      check_dropout(l.dropout_rate);
      if (l.activation == Activation::softmax && i + 1 != layers.size()) {
        throw ArgumentError("softmax is only allowed on the final layer");
      }
      if (!std::isfinite(l.leaky_slope)) throw ArgumentError("leaky slope must be finite");
      if (i + 1 < layers.size() && l.output_width != layers[i + 1].input_width) {
        throw ShapeError("layer " + std::to_string(i) + " output width " +
                         std::to_string(l.output_width) + " != layer " + std::to_string(i + 1) +
                         " input width " + std::to_string(layers[i + 1].input_width));
      }
    }
  }

  std::vector<LayerSpec> layers_;
  Parameters params_;
  AdamState optimizer_;
  std::uint64_t seed_ = 0;
};

/// Convenience: input -> hidden... -> softmax(classes), dropout after each hidden layer.
inline Network make_classifier(std::size_t input_width, const std::vector<std::size_t>& hidden,
                               std::size_t classes, Activation hidden_activation,
                               double hidden_dropout, std::uint64_t seed,
                               double leaky_slope = kDefaultLeakySlope) {
  std::vector<LayerSpec> layers;
  std::size_t width = input_width;
  for (std::size_t h : hidden) {
    layers.push_back({width, h, hidden_activation, leaky_slope, layers.empty() ? 0.0 : hidden_dropout});
    width = h;
  }
  layers.push_back({width, classes, Activation::softmax, leaky_slope, layers.empty() ? 0.0 : hidden_dropout});
  return Network(std::move(layers), seed);
}

// ---------------------------------------------------------------------------
// Forward pass

struct LayerCache {
  RealMatrix input;  // after dropout
  RealMatrix mask;   // empty when no dropout was sampled
  RealMatrix pre;
  RealMatrix out;
};

struct ForwardPass {
  RealMatrix probs;  // class probabilities (sigmoid heads expanded to [1-p, p])
  std::vector<LayerCache> cache;
};

namespace detail {

inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

inline void apply_activation(const LayerSpec& l, const RealMatrix& pre, RealMatrix& out) {
  out = pre;
  switch (l.activation) {
    case Activation::identity: break;
    case Activation::relu:
      for (double& v : out.data()) v = v > 0.0 ? v : 0.0;
      break;
    case Activation::leaky_relu:
      for (double& v : out.data()) v = v > 0.0 ? v : l.leaky_slope * v;
      break;
    case Activation::sigmoid:
      for (double& v : out.data()) v = sigmoid(v);
      break;
    case Activation::softmax:
      for (std::size_t i = 0; i < out.rows(); ++i) {
        auto r = out.row(i);
        const double mx = *std::max_element(r.begin(), r.end());
        double sum = 0.0;
        for (double& v : r) {
          v = std::exp(v - mx);
          sum += v;
        }
        for (double& v : r) v /= sum;
      }
      break;
  }
}

/// Elementwise activation derivative for hidden (non-softmax) layers.
inline double activation_slope(const LayerSpec& l, double pre, double out) {
  switch (l.activation) {
    case Activation::identity: return 1.0;
    case Activation::relu: return pre > 0.0 ? 1.0 : 0.0;
    case Activation::leaky_relu: return pre > 0.0 ? 1.0 : l.leaky_slope;
    case Activation::sigmoid: return out * (1.0 - out);
    case Activation::softmax: break;
  }
  throw ArgumentError("softmax has no elementwise derivative");
}

inline RealMatrix class_probabilities(const Network& net, const RealMatrix& final_out) {
  const auto& last = net.layers().back();
  if (last.activation == Activation::sigmoid && last.output_width == 1) {
    RealMatrix probs(final_out.rows(), 2);
    for (std::size_t i = 0; i < final_out.rows(); ++i) {
      probs(i, 0) = 1.0 - final_out(i, 0);
      probs(i, 1) = final_out(i, 0);
    }
    return probs;
  }
  return final_out;
}

}  // namespace detail

/// Runs the network on a batch (one sample per row). With dropout_active, each
/// layer input is masked and retained units are scaled by 1 / (1 - rate).
inline ForwardPass forward(const Network& net, const RealMatrix& batch, bool dropout_active, Rng& rng) {
  if (batch.cols() != net.input_width()) {
    throw ShapeError("batch width " + std::to_string(batch.cols()) + " != network input width " +
                     std::to_string(net.input_width()));
  }
  ForwardPass result;
  result.cache.reserve(net.depth());
  const RealMatrix* current = &batch;
  for (std::size_t li = 0; li < net.depth(); ++li) {
    const auto& spec = net.layers()[li];
    LayerCache c;
    c.input = *current;
    if (dropout_active && spec.dropout_rate > 0.0) {
      const double keep = 1.0 - spec.dropout_rate;
      std::bernoulli_distribution retain(keep);
      c.mask = RealMatrix(c.input.rows(), c.input.cols());
      auto mask = c.mask.data();
      auto in = c.input.data();
      for (std::size_t k = 0; k < mask.size(); ++k) {
        mask[k] = retain(rng) ? 1.0 / keep : 0.0;
        in[k] *= mask[k];
      }
    }
    c.pre = matmul_bt(c.input, net.parameters().weights[li]);
    const auto bias = net.parameters().biases[li].row(0);
    for (std::size_t i = 0; i < c.pre.rows(); ++i) {
      auto r = c.pre.row(i);
      for (std::size_t j = 0; j < r.size(); ++j) r[j] += bias[j];
    }
    detail::apply_activation(spec, c.pre, c.out);
    if (!all_finite(c.out.data())) {
      throw NumericError("non-finite activation in layer " + std::to_string(li));
    }
    result.cache.push_back(std::move(c));
    current = &result.cache.back().out;
  }
  result.probs = detail::class_probabilities(net, result.cache.back().out);
  return result;
}

/// Deterministic (dropout disabled) class probabilities.
inline RealMatrix predict_proba(const Network& net, const RealMatrix& batch) {
  Rng unused(0);
  return forward(net, batch, false, unused).probs;
}

inline std::vector<std::size_t> predict_labels(const Network& net, const RealMatrix& batch) {
  const RealMatrix probs = predict_proba(net, batch);
  std::vector<std::size_t> labels(probs.rows());
  for (std::size_t i = 0; i < probs.rows(); ++i) labels[i] = argmax(probs.row(i));
  return labels;
}

// ---------------------------------------------------------------------------
// Losses

inline constexpr double kProbabilityClamp = 1e-12;

struct CrossEntropy {
  std::vector<double> class_weights;  // empty means all ones
};

struct Focal {
  double alpha = 4.0;
  double gamma = 2.0;
};

using LossKind = std::variant<CrossEntropy, Focal>;

inline std::string loss_name(const LossKind& loss) {
  return std::holds_alternative<CrossEntropy>(loss) ? "cross_entropy" : "focal";
}

inline void validate_loss(const LossKind& loss, std::size_t class_count) {
  if (const auto* ce = std::get_if<CrossEntropy>(&loss)) {
    if (!ce->class_weights.empty()) {
      if (ce->class_weights.size() != class_count) {
        throw ArgumentError("class_weights has " + std::to_string(ce->class_weights.size()) +
                            " entries for " + std::to_string(class_count) + " classes");
      }
      for (double w : ce->class_weights) {
        if (!(w > 0.0) || !std::isfinite(w)) throw ArgumentError("class weights must be positive");
      }
    }
  } else {
    const auto& f = std::get<Focal>(loss);
    if (!(f.alpha > 0.0) || !(f.gamma >= 0.0)) {
      throw ArgumentError("focal loss needs alpha > 0 and gamma >= 0");
    }
  }
}

inline double clamp_probability(double p) {
  return std::clamp(p, kProbabilityClamp, 1.0 - kProbabilityClamp);
}

/// -alpha (1 - p)^gamma ln p, natural log, p clamped.
inline double focal_loss(double p_true, double alpha, double gamma) {
  const double p = clamp_probability(p_true);
  return -alpha * std::pow(1.0 - p, gamma) * std::log(p);
}

/// Per-sample loss given the probability assigned to the true class.
inline double sample_loss(const LossKind& loss, double p_true, std::size_t label) {
  if (const auto* ce = std::get_if<CrossEntropy>(&loss)) {
    const double w = ce->class_weights.empty() ? 1.0 : ce->class_weights[label];
    return -w * std::log(clamp_probability(p_true));
  }
  const auto& f = std::get<Focal>(loss);
  return focal_loss(p_true, f.alpha, f.gamma);
}

/// d(sample_loss)/d(p_true). Zero where the clamp is active.
inline double sample_loss_slope(const LossKind& loss, double p_true, std::size_t label) {
  if (p_true < kProbabilityClamp || p_true > 1.0 - kProbabilityClamp) return 0.0;
  const double p = p_true;
  if (const auto* ce = std::get_if<CrossEntropy>(&loss)) {
    const double w = ce->class_weights.empty() ? 1.0 : ce->class_weights[label];
    return -w / p;
  }
  const auto& f = std::get<Focal>(loss);
  const double q = 1.0 - p;
  const double modulating = f.gamma == 0.0 ? 0.0 : f.gamma * std::pow(q, f.gamma - 1.0) * std::log(p);
  return f.alpha * (modulating - std::pow(q, f.gamma) / p);
}

struct LossAndGrad {
  double loss = 0.0;       // data loss + (l2 / 2) * sum of squared weights
  double data_loss = 0.0;  // mean per-sample loss
  Parameters gradients;
  RealMatrix probs;        // probabilities from the pass the gradients belong to
};

inline void check_labels(std::span<const std::size_t> labels, std::size_t rows, std::size_t classes) {
  if (labels.size() != rows) {
    throw ShapeError(std::to_string(labels.size()) + " labels for " + std::to_string(rows) + " rows");
  }
  for (std::size_t y : labels) {
    if (y >= classes) {
      throw ArgumentError("label " + std::to_string(y) + " outside [0, " + std::to_string(classes) + ")");
    }
  }
}

/// Mean loss over the batch plus L2, with gradients by backpropagation through
/// the same pass (including any dropout masks it sampled).
inline LossAndGrad loss_and_grad(const Network& net, const RealMatrix& batch,
                                 std::span<const std::size_t> labels, const LossKind& loss,
                                 double l2, bool dropout_active, Rng& rng) {
  const std::size_t classes = net.class_count();
  if (classes == 0) throw ArgumentError("loss needs a softmax or single-sigmoid output layer");
  if (batch.rows() == 0) throw ArgumentError("empty batch");
  if (!(l2 >= 0.0)) throw ArgumentError("l2 must be non-negative");
  check_labels(labels, batch.rows(), classes);
  validate_loss(loss, classes);

  ForwardPass pass = forward(net, batch, dropout_active, rng);
  const std::size_t n = batch.rows();
  const double inv_n = 1.0 / static_cast<double>(n);

  LossAndGrad result;
  result.gradients = zeros_like(net.parameters());

  // dL/d(probs)
  RealMatrix grad_probs(n, classes);
  for (std::size_t i = 0; i < n; ++i) {
    const double p = pass.probs(i, labels[i]);
    result.data_loss += sample_loss(loss, p, labels[i]);
    grad_probs(i, labels[i]) = sample_loss_slope(loss, p, labels[i]) * inv_n;
  }
  result.data_loss *= inv_n;

  // dL/d(pre-activation) of the output layer
  const std::size_t last = net.depth() - 1;
  const auto& last_cache = pass.cache[last];
  RealMatrix delta(n, net.output_width());
  if (net.layers()[last].activation == Activation::softmax) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto p = pass.probs.row(i);
      const auto g = grad_probs.row(i);
      double dot = 0.0;
      for (std::size_t k = 0; k < classes; ++k) dot += g[k] * p[k];
      for (std::size_t k = 0; k < classes; ++k) delta(i, k) = p[k] * (g[k] - dot);
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      const double s = last_cache.out(i, 0);
      delta(i, 0) = (grad_probs(i, 1) - grad_probs(i, 0)) * s * (1.0 - s);
    }
  }

  for (std::size_t li = net.depth(); li-- > 0;) {
    const auto& c = pass.cache[li];
    result.gradients.weights[li] = matmul_at(delta, c.input);
    auto db = result.gradients.biases[li].row(0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto d = delta.row(i);
      for (std::size_t j = 0; j < d.size(); ++j) db[j] += d[j];
    }
    if (li == 0) break;
    RealMatrix upstream = matmul(delta, net.parameters().weights[li]);
    if (!c.mask.empty()) {
      auto u = upstream.data();
      const auto m = c.mask.data();
      for (std::size_t k = 0; k < u.size(); ++k) u[k] *= m[k];
    }
    const auto& prev = pass.cache[li - 1];
    const auto& prev_spec = net.layers()[li - 1];
    auto u = upstream.data();
    const auto pre = prev.pre.data();
    const auto out = prev.out.data();
    for (std::size_t k = 0; k < u.size(); ++k) u[k] *= detail::activation_slope(prev_spec, pre[k], out[k]);
    delta = std::move(upstream);
  }

  double penalty = 0.0;
  for (std::size_t li = 0; li < net.depth(); ++li) {
    const auto w = net.parameters().weights[li].data();
    auto g = result.gradients.weights[li].data();
    for (std::size_t k = 0; k < w.size(); ++k) {
      penalty += w[k] * w[k];
      g[k] += l2 * w[k];
    }
  }
  result.loss = result.data_loss + 0.5 * l2 * penalty;
  result.probs = std::move(pass.probs);
  if (!std::isfinite(result.loss)) throw NumericError("loss is not finite");
  return result;
}

// ---------------------------------------------------------------------------
// Optimization

/// One bias-corrected Adam update, in place.
inline void adam_step(Network& net, const Parameters& gradients, double learning_rate,
                      const AdamOptions& opts = {}) {
  if (!same_shapes(gradients, net.parameters())) {
    throw ShapeError("gradient shapes do not match parameter shapes");
  }
  auto& state = net.optimizer_state();
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(opts.beta1, t);
  const double correction2 = 1.0 - std::pow(opts.beta2, t);

  auto update = [&](RealMatrix& param, const RealMatrix& grad, RealMatrix& m, RealMatrix& v) {
    auto p = param.data();
    const auto g = grad.data();
    auto md = m.data();
    auto vd = v.data();
    for (std::size_t k = 0; k < p.size(); ++k) {
      md[k] = opts.beta1 * md[k] + (1.0 - opts.beta1) * g[k];
      vd[k] = opts.beta2 * vd[k] + (1.0 - opts.beta2) * g[k] * g[k];
      const double m_hat = md[k] / correction1;
      const double v_hat = vd[k] / correction2;
      p[k] -= learning_rate * m_hat / (std::sqrt(v_hat) + opts.epsilon);
    }
  };
  auto& params = net.parameters();
  for (std::size_t li = 0; li < params.weights.size(); ++li) {
    update(params.weights[li], gradients.weights[li], state.first_moment.weights[li],
           state.second_moment.weights[li]);
    update(params.biases[li], gradients.biases[li], state.first_moment.biases[li],
           state.second_moment.biases[li]);
  }
}

struct TrainConfig {
  std::size_t epochs = 15;
  std::size_t batch_size = 128;
  double learning_rate = 1e-4;
  double l2 = 1e-4;
  bool dropout_active = true;
  std::uint64_t seed = 0;

  void validate() const {
    if (epochs < 1) throw ArgumentError("epochs must be >= 1");
    if (batch_size < 1) throw ArgumentError("batch_size must be >= 1");
    if (!(learning_rate > 0.0)) throw ArgumentError("learning_rate must be > 0");
    if (!(l2 >= 0.0)) throw ArgumentError("l2 must be >= 0");
  }

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double loss = 0.0;
  double accuracy = 0.0;  // on the training batches as they were seen
};

using TrainHistory = std::vector<EpochRecord>;

/// Mini-batch Adam. Shuffling and dropout masks come from cfg.seed, so the
/// result is a pure function of (net, data, cfg, loss). The last batch of an
/// epoch may be short.
inline TrainHistory train(Network& net, const RealMatrix& x, std::span<const std::size_t> y,
                          const TrainConfig& cfg, const LossKind& loss) {
  cfg.validate();
  if (x.rows() == 0) throw ArgumentError("cannot train on an empty dataset");
  if (net.class_count() == 0) throw ArgumentError("network has no classifier head");
  check_labels(y, x.rows(), net.class_count());
  validate_loss(loss, net.class_count());

  Rng rng(cfg.seed);
  std::vector<std::size_t> order(x.rows());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<std::size_t> batch_labels;
  TrainHistory history;
  history.reserve(cfg.epochs);

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
      const std::span<const std::size_t> idx(order.data() + start, stop - start);
      const RealMatrix batch = x.select_rows(idx);
      batch_labels.clear();
      for (std::size_t i : idx) batch_labels.push_back(y[i]);

      LossAndGrad lg = loss_and_grad(net, batch, batch_labels, loss, cfg.l2, cfg.dropout_active, rng);
      adam_step(net, lg.gradients, cfg.learning_rate);
      loss_sum += lg.loss * static_cast<double>(idx.size());
      for (std::size_t i = 0; i < idx.size(); ++i) {
        if (argmax(lg.probs.row(i)) == batch_labels[i]) ++correct;
      }
    }
    const double n = static_cast<double>(order.size());
    history.push_back({epoch + 1, loss_sum / n, static_cast<double>(correct) / n});
  }
  return history;
}

}  // namespace ual

#endif  // UAL_NN_HPP
