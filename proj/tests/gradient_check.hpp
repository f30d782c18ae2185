#ifndef UAL_TESTS_GRADIENT_CHECK_HPP
#define UAL_TESTS_GRADIENT_CHECK_HPP

// Central finite differences against loss_and_grad on random small networks.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "ual/nn.hpp"

namespace ual::testing_support {

struct GradientCheckSummary {
  std::size_t probes = 0;
  double max_relative_error = 0.0;
};

/// |a - n| / max(|a|, |n|, 1e-7); the floor keeps vanishing gradients from
/// turning rounding noise into huge ratios.
inline double relative_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1e-7});
}

inline GradientCheckSummary run_gradient_check(const LossKind& loss, std::size_t classes, std::size_t nets,
                                               std::uint64_t seed, bool sigmoid_head = false,
                                               std::size_t probes_per_net = 12) {
  constexpr double kStep = 1e-5;
  constexpr double kL2 = 1e-3;
  const Activation hidden_kinds[] = {Activation::relu, Activation::leaky_relu, Activation::sigmoid,
                                     Activation::identity};
  Rng rng(seed);
  std::uniform_int_distribution<std::size_t> width(2, 8);
  std::uniform_int_distribution<std::size_t> depth(1, 3);
  std::normal_distribution<double> normal(0.0, 1.0);
  GradientCheckSummary summary;

  for (std::size_t t = 0; t < nets; ++t) {
    const std::size_t layers = depth(rng);
    std::vector<LayerSpec> spec;
    std::size_t in = width(rng);
    const std::size_t input_width = in;
    for (std::size_t l = 0; l + 1 < layers; ++l) {
      const std::size_t out = width(rng);
      spec.push_back({in, out, hidden_kinds[(t + l) % 4], 0.05, 0.0});
      in = out;
    }
    if (sigmoid_head) {
      spec.push_back({in, 1, Activation::sigmoid, 0.05, 0.0});
    } else {
      spec.push_back({in, classes, Activation::softmax, 0.05, 0.0});
    }
    Network net(spec, rng());
    for (auto& b : net.parameters().biases) {
      for (double& v : b.data()) v = 0.1 * normal(rng);
    }
    const std::size_t out_classes = net.class_count();

    const std::size_t batch = 6;
    RealMatrix x(batch, input_width);
    for (double& v : x.data()) v = normal(rng);
    std::vector<std::size_t> y(batch);
    for (std::size_t i = 0; i < batch; ++i) y[i] = i % out_classes;

    Rng unused(0);
    const LossAndGrad lg = loss_and_grad(net, x, y, loss, kL2, false, unused);

    for (std::size_t p = 0; p < probes_per_net; ++p) {
      const std::size_t layer = std::uniform_int_distribution<std::size_t>(0, net.depth() - 1)(rng);
      const bool weight = std::bernoulli_distribution(0.75)(rng);
      RealMatrix& param = weight ? net.parameters().weights[layer] : net.parameters().biases[layer];
      const RealMatrix& grad = weight ? lg.gradients.weights[layer] : lg.gradients.biases[layer];
      const std::size_t k = std::uniform_int_distribution<std::size_t>(0, param.size() - 1)(rng);

      const double original = param.data()[k];
      param.data()[k] = original + kStep;
      const double up = loss_and_grad(net, x, y, loss, kL2, false, unused).loss;
      param.data()[k] = original - kStep;
      const double down = loss_and_grad(net, x, y, loss, kL2, false, unused).loss;
      param.data()[k] = original;

      const double numeric = (up - down) / (2.0 * kStep);
      summary.max_relative_error = std::max(summary.max_relative_error, relative_error(grad.data()[k], numeric));
      ++summary.probes;
    }
  }
  return summary;
}

}  // namespace ual::testing_support

#endif  // UAL_TESTS_GRADIENT_CHECK_HPP
