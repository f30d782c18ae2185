#ifndef UAL_MC_DROPOUT_HPP
#define UAL_MC_DROPOUT_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ual/error.hpp"
#include "ual/matrix.hpp"
#include "ual/nn.hpp"
#include "ual/random.hpp"

namespace ual {

inline constexpr std::array<std::size_t, 3> kDefaultMcSettings{5, 20, 50};
inline constexpr std::size_t kDefaultMcSamples = 20;

/// Entropy in bits, with 0 log 0 = 0.
inline double predictive_entropy(std::span<const double> p) {
  if (p.empty()) throw ArgumentError("entropy of an empty distribution");
  double sum = 0.0;
  for (double v : p) {
    if (!std::isfinite(v) || v < 0.0) throw ArgumentError("probability entries must be >= 0");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-6) {
    throw ArgumentError("probabilities sum to " + std::to_string(sum) + ", not 1");
  }
  double h = 0.0;
  for (double v : p) {
    if (v > 0.0) h -= v * std::log2(v);
  }
  // Rounding can push a near-one-hot vector a hair below zero.
  return h < 0.0 ? 0.0 : h;
}

inline double predictive_entropy(const std::vector<double>& p) {
  return predictive_entropy(std::span<const double>(p));
}

struct PredictiveDistribution {
  RealMatrix per_sample_probs;  // S x C
  std::vector<double> mean_probs;
  double entropy_bits = 0.0;
  std::size_t predicted_label = 0;
};

/// Averages S stochastic passes: mean over rows, entropy of the mean, argmax.
inline PredictiveDistribution summarize_passes(RealMatrix per_sample_probs) {
  if (per_sample_probs.rows() == 0 || per_sample_probs.cols() == 0) {
    throw ArgumentError("no MC passes to summarize");
  }
  PredictiveDistribution d;
  // Running mean: identical passes give back exactly that pass.
  const auto first = per_sample_probs.row(0);
  d.mean_probs.assign(first.begin(), first.end());
  for (std::size_t s = 1; s < per_sample_probs.rows(); ++s) {
    const auto r = per_sample_probs.row(s);
    const double k = static_cast<double>(s + 1);
    for (std::size_t c = 0; c < r.size(); ++c) d.mean_probs[c] += (r[c] - d.mean_probs[c]) / k;
  }
  d.entropy_bits = predictive_entropy(d.mean_probs);
  d.predicted_label = argmax(d.mean_probs);
  d.per_sample_probs = std::move(per_sample_probs);
  return d;
}

/// MC-dropout prediction for every row of x. Pass s draws its masks from a
/// stream derived from (base seed, s), so passes are order-independent.
inline std::vector<PredictiveDistribution> mc_predict_batch(const Network& net, const RealMatrix& x,
                                                            std::size_t samples, Rng& rng) {
  if (samples == 0) throw ArgumentError("MC sample count must be >= 1");
  if (net.class_count() == 0) throw ArgumentError("MC prediction needs a classifier head");
  const std::uint64_t base = rng();
  const std::size_t classes = net.class_count();

  std::vector<RealMatrix> per_row(x.rows(), RealMatrix(samples, classes));
  for (std::size_t s = 0; s < samples; ++s) {
    Rng pass_rng = derive_rng(base, s);
    const RealMatrix probs = forward(net, x, true, pass_rng).probs;
    for (std::size_t i = 0; i < x.rows(); ++i) {
      const auto src = probs.row(i);
      std::copy(src.begin(), src.end(), per_row[i].row(s).begin());
    }
  }
  std::vector<PredictiveDistribution> out;
  out.reserve(x.rows());
  for (auto& m : per_row) out.push_back(summarize_passes(std::move(m)));
  return out;
}

inline PredictiveDistribution mc_predict(const Network& net, std::span<const double> x,
                                         std::size_t samples, Rng& rng) {
  if (x.size() != net.input_width()) {
    throw ShapeError("feature vector width " + std::to_string(x.size()) +
                     " != network input width " + std::to_string(net.input_width()));
  }
  RealMatrix row(1, x.size(), std::vector<double>(x.begin(), x.end()));
  return std::move(mc_predict_batch(net, row, samples, rng).front());
}

/// Deterministic probabilities when samples <= 1, MC means otherwise.
inline RealMatrix mean_probabilities(const Network& net, const RealMatrix& x, std::size_t samples,
                                     Rng& rng) {
  if (samples <= 1) return predict_proba(net, x);
  const auto dists = mc_predict_batch(net, x, samples, rng);
  RealMatrix out(x.rows(), net.class_count());
  for (std::size_t i = 0; i < dists.size(); ++i) {
    std::copy(dists[i].mean_probs.begin(), dists[i].mean_probs.end(), out.row(i).begin());
  }
  return out;
}

struct UncertaintyThreshold {
  double value_bits = 0.0;
  std::size_t class_count = 0;
  double fraction_of_max = 0.0;
};

/// T = fraction * log2(C).
inline UncertaintyThreshold threshold_from_fraction(std::size_t class_count, double fraction) {
  if (class_count < 2) throw ArgumentError("threshold needs at least 2 classes");
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw ArgumentError("threshold fraction must be in (0, 1], got " + std::to_string(fraction));
  }
  return {fraction * std::log2(static_cast<double>(class_count)), class_count, fraction};
}

}  // namespace ual

#endif  // UAL_MC_DROPOUT_HPP
