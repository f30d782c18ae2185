#include "ual/mc_dropout.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "gtest/gtest.h"

namespace ual {
namespace {

RealMatrix random_rows(std::size_t n, std::size_t d, std::uint64_t seed) {
  RealMatrix x(n, d);
  Rng rng(seed);
  std::normal_distribution<double> normal(0, 1);
  for (double& v : x.data()) v = normal(rng);
  return x;
}

TEST(PredictiveEntropy, OneHotIsZero) {
  EXPECT_EQ(predictive_entropy(std::vector<double>{0, 1, 0}), 0.0);
}

TEST(PredictiveEntropy, UniformFiveClassesIsLog2Five) {
  EXPECT_NEAR(predictive_entropy(std::vector<double>(5, 0.2)), 2.321928094887362, 1e-12);
  EXPECT_NEAR(predictive_entropy(std::vector<double>(5, 0.2)), 2.32, 0.002);
}

TEST(PredictiveEntropy, WorkedExampleInBits) {
  EXPECT_NEAR(predictive_entropy(std::vector<double>{0.3, 0.4, 0.3}), 1.57, 0.01);
  EXPECT_NEAR(predictive_entropy(std::vector<double>{0.4, 0.45, 0.15}), 1.46, 0.01);
}

TEST(PredictiveEntropy, RejectsInvalidDistributions) {
  EXPECT_THROW(predictive_entropy(std::vector<double>{-0.1, 1.1}), ArgumentError);
  EXPECT_THROW(predictive_entropy(std::vector<double>{0.3, 0.3}), ArgumentError);
  EXPECT_THROW(predictive_entropy(std::vector<double>{}), ArgumentError);
}

TEST(PredictiveEntropy, BoundedByLog2C) {
  Rng rng(4);
  std::gamma_distribution<double> g(0.5, 1.0);
  for (int t = 0; t < 200; ++t) {
    const std::size_t c = 2 + t % 7;
    std::vector<double> p(c);
    for (double& v : p) v = g(rng);
    const double s = std::accumulate(p.begin(), p.end(), 0.0);
    for (double& v : p) v /= s;
    const double h = predictive_entropy(p);
    EXPECT_GE(h, 0.0);
    EXPECT_LE(h, std::log2(static_cast<double>(c)) + 1e-12);
  }
}

TEST(Summarize, ConstructedPassesAverageAndEntropy) {
  // mean [0.7, 0.3]; -0.7 log2 0.7 - 0.3 log2 0.3
  const auto d = summarize_passes(RealMatrix::from_rows({{0.6, 0.4}, {0.8, 0.2}}));
  EXPECT_NEAR(d.mean_probs[0], 0.7, 1e-15);
  EXPECT_NEAR(d.mean_probs[1], 0.3, 1e-15);
  EXPECT_NEAR(d.entropy_bits, 0.8812908992306927, 1e-12);
  EXPECT_EQ(d.predicted_label, 0u);
}

TEST(Summarize, TieGoesToLowestIndex) {
  const auto d = summarize_passes(RealMatrix::from_rows({{0.5, 0.5}}));
  EXPECT_EQ(d.predicted_label, 0u);
}

TEST(McPredict, NoDropoutMakesPassesIdentical) {
  const Network net = make_classifier(6, {10, 8}, 4, Activation::relu, 0.0, 3);
  const RealMatrix x = random_rows(1, 6, 9);
  Rng rng(1);
  const auto d = mc_predict(net, x.row(0), 20, rng);
  for (std::size_t s = 1; s < 20; ++s) {
    for (std::size_t c = 0; c < 4; ++c) EXPECT_EQ(d.per_sample_probs(s, c), d.per_sample_probs(0, c));
  }
  const RealMatrix single = predict_proba(net, x);
  EXPECT_EQ(d.entropy_bits, predictive_entropy(single.row(0)));
}

TEST(McPredict, SingleSampleEqualsThePass) {
  const Network net = make_classifier(3, {5}, 3, Activation::relu, 0.5, 3);
  const RealMatrix x = random_rows(1, 3, 2);
  Rng rng(8);
  const auto d = mc_predict(net, x.row(0), 1, rng);
  for (std::size_t c = 0; c < 3; ++c) EXPECT_EQ(d.mean_probs[c], d.per_sample_probs(0, c));
}

TEST(McPredict, FreshMaskPerPass) {
  const Network net = make_classifier(8, {16}, 3, Activation::relu, 0.5, 3);
  const RealMatrix x = random_rows(1, 8, 2);
  Rng rng(8);
  const auto d = mc_predict(net, x.row(0), 10, rng);
  std::size_t distinct = 0;
  for (std::size_t s = 1; s < 10; ++s) distinct += d.per_sample_probs(s, 0) != d.per_sample_probs(0, 0);
  EXPECT_GT(distinct, 0u);
}

TEST(McPredict, DeterministicForSameSeed) {
  const Network net = make_classifier(5, {12}, 3, Activation::leaky_relu, 0.3, 3);
  const RealMatrix x = random_rows(4, 5, 2);
  Rng a(42), b(42);
  const auto da = mc_predict_batch(net, x, 20, a);
  const auto db = mc_predict_batch(net, x, 20, b);
  for (std::size_t i = 0; i < da.size(); ++i) {
    EXPECT_EQ(da[i].per_sample_probs, db[i].per_sample_probs);
    EXPECT_EQ(da[i].entropy_bits, db[i].entropy_bits);
  }
}

TEST(McPredict, InvariantsHoldOnRandomInputs) {
  const Network net = make_classifier(5, {12}, 5, Activation::relu, 0.4, 13);
  const RealMatrix x = random_rows(30, 5, 2);
  Rng rng(5);
  for (const auto& d : mc_predict_batch(net, x, 12, rng)) {
    double min_pass = INFINITY;
    for (std::size_t s = 0; s < d.per_sample_probs.rows(); ++s) {
      const auto row = d.per_sample_probs.row(s);
      EXPECT_NEAR(std::accumulate(row.begin(), row.end(), 0.0), 1.0, 1e-9);
      min_pass = std::min(min_pass, predictive_entropy(row));
    }
    for (std::size_t c = 0; c < 5; ++c) {
      double col = 0;
      for (std::size_t s = 0; s < d.per_sample_probs.rows(); ++s) col += d.per_sample_probs(s, c);
      EXPECT_NEAR(d.mean_probs[c], col / 12.0, 1e-14);
    }
    EXPECT_GE(d.entropy_bits, 0.0);
    EXPECT_LE(d.entropy_bits, std::log2(5.0) + 1e-12);
    EXPECT_GE(d.entropy_bits, min_pass - 1e-12);  // concavity
    EXPECT_EQ(d.predicted_label, argmax(d.mean_probs));
  }
}

TEST(McPredict, ClassPermutationPermutesLabelAndKeepsEntropy) {
  Network net = make_classifier(4, {9}, 3, Activation::relu, 0.3, 17);
  Network permuted = net;
  const std::size_t perm[3] = {2, 0, 1};  // new class k = old class perm[k]
  auto& w_old = net.parameters().weights.back();
  auto& w_new = permuted.parameters().weights.back();
  for (std::size_t k = 0; k < 3; ++k) {
    for (std::size_t j = 0; j < w_old.cols(); ++j) w_new(k, j) = w_old(perm[k], j);
  }
  const RealMatrix x = random_rows(10, 4, 6);
  Rng a(3), b(3);
  const auto da = mc_predict_batch(net, x, 8, a);
  const auto db = mc_predict_batch(permuted, x, 8, b);
  for (std::size_t i = 0; i < da.size(); ++i) {
    EXPECT_NEAR(da[i].entropy_bits, db[i].entropy_bits, 1e-12);
    EXPECT_EQ(perm[db[i].predicted_label], da[i].predicted_label);
  }
}

TEST(McPredict, SigmoidHeadGivesTwoClassDistribution) {
  Network net({{3, 4, Activation::relu}, {4, 1, Activation::sigmoid, 0.01, 0.2}}, 4);
  const RealMatrix x = random_rows(1, 3, 1);
  Rng rng(2);
  const auto d = mc_predict(net, x.row(0), 5, rng);
  ASSERT_EQ(d.mean_probs.size(), 2u);
  EXPECT_NEAR(d.mean_probs[0] + d.mean_probs[1], 1.0, 1e-12);
  EXPECT_LE(d.entropy_bits, 1.0);
}

TEST(McPredict, RejectsZeroSamplesAndWrongWidth) {
  const Network net = make_classifier(3, {}, 2, Activation::relu, 0.0, 1);
  Rng rng(0);
  const std::vector<double> x{1, 2, 3};
  EXPECT_THROW(mc_predict(net, x, 0, rng), ArgumentError);
  EXPECT_THROW(mc_predict(net, std::vector<double>{1, 2}, 5, rng), ShapeError);
}

TEST(Threshold, FractionOfMaximumEntropy) {
  const auto t5 = threshold_from_fraction(5, 0.55);
  EXPECT_NEAR(t5.value_bits, 1.277, 0.002);
  EXPECT_NEAR(t5.value_bits, 1.276, 0.002);
  EXPECT_NEAR(t5.value_bits, 0.55 * std::log2(5.0), 1e-12);
  EXPECT_NEAR(threshold_from_fraction(2, 0.5).value_bits, 0.5, 1e-15);
  for (std::size_t c = 2; c < 10; ++c) {
    EXPECT_NEAR(threshold_from_fraction(c, 1.0).value_bits, std::log2(static_cast<double>(c)), 1e-12);
  }
}

TEST(Threshold, RejectsOutOfRange) {
  EXPECT_THROW(threshold_from_fraction(5, 0.0), ArgumentError);
  EXPECT_THROW(threshold_from_fraction(5, 1.01), ArgumentError);
  EXPECT_THROW(threshold_from_fraction(1, 0.5), ArgumentError);
}

}  // namespace
}  // namespace ual
