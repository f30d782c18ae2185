#ifndef UAL_ANNOTATOR_HPP
#define UAL_ANNOTATOR_HPP

// A trained MC-dropout network used as an automatic labeler: it returns a
// label only when the predictive entropy of its averaged output is below T.

#include <concepts>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ual/error.hpp"
#include "ual/matrix.hpp"
#include "ual/mc_dropout.hpp"
#include "ual/nn.hpp"
#include "ual/random.hpp"

namespace ual {

struct Annotation {
  std::size_t label = 0;
  double uncertainty_bits = 0.0;
  bool confident = false;  // uncertainty_bits < T
  std::vector<double> mean_probs;
};

enum class Verdict { accepted, abstained, label_mismatch };

inline std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::accepted: return "accepted";
    case Verdict::abstained: return "abstained";
    case Verdict::label_mismatch: return "label_mismatch";
  }
  return "unknown";
}

struct AnnotatedSample {
  std::size_t index = 0;  // row in the annotated batch
  Annotation annotation;
  bool accepted = false;
  Verdict verdict = Verdict::abstained;
};

using GroundTruth = std::optional<std::span<const std::size_t>>;

/// Anything the active-learning loops can ask for labels.
template <typename T>
concept LabelOracle = requires(const T& oracle, const RealMatrix& x, GroundTruth truth, Rng& rng) {
  { oracle.annotate_batch(x, truth, rng) } -> std::same_as<std::vector<AnnotatedSample>>;
};

namespace detail {

inline void check_truth(const GroundTruth& truth, std::size_t rows) {
  if (truth && truth->size() != rows) {
    throw ShapeError(std::to_string(truth->size()) + " ground-truth labels for " +
                     std::to_string(rows) + " rows");
  }
}

inline AnnotatedSample gate(std::size_t index, Annotation a, const GroundTruth& truth, bool verify) {
  AnnotatedSample s;
  s.index = index;
  if (!a.confident) {
    s.verdict = Verdict::abstained;
  } else if (verify && a.label != (*truth)[index]) {
    s.verdict = Verdict::label_mismatch;
  } else {
    s.verdict = Verdict::accepted;
  }
  s.accepted = s.verdict == Verdict::accepted;
  s.annotation = std::move(a);
  return s;
}

}  // namespace detail

class Annotator {
 public:
  Annotator(Network model, UncertaintyThreshold threshold, std::size_t mc_samples,
            bool verify_against_ground_truth = false)
      : model_(std::move(model)),
        threshold_(threshold),
        mc_samples_(mc_samples),
        verify_(verify_against_ground_truth) {
    if (mc_samples_ < 1) throw ArgumentError("annotator needs mc_samples >= 1");
    if (model_.class_count() == 0) throw ArgumentError("annotator model has no classifier head");
    if (threshold_.class_count != model_.class_count()) {
      throw ArgumentError("threshold is for " + std::to_string(threshold_.class_count) +
                          " classes but the model predicts " + std::to_string(model_.class_count()));
    }
  }

  const Network& model() const noexcept { return model_; }
  const UncertaintyThreshold& threshold() const noexcept { return threshold_; }
  std::size_t mc_samples() const noexcept { return mc_samples_; }
  bool verifies() const noexcept { return verify_; }

  Annotation from_distribution(const PredictiveDistribution& d) const {
    return from_distribution(d, threshold_);
  }

  static Annotation from_distribution(const PredictiveDistribution& d, const UncertaintyThreshold& t) {
    return {d.predicted_label, d.entropy_bits, d.entropy_bits < t.value_bits, d.mean_probs};
  }

  Annotation annotate(std::span<const double> x, Rng& rng) const {
    return from_distribution(mc_predict(model_, x, mc_samples_, rng));
  }

  /// accepted = confident && (!verify || label == truth). Every row gets a
  /// record; rejected rows carry the reason.
  std::vector<AnnotatedSample> annotate_batch(const RealMatrix& x, GroundTruth truth, Rng& rng) const {
    if (verify_ && !truth) throw ArgumentError("label verification requested without ground truth");
    detail::check_truth(truth, x.rows());
    if (x.cols() != model_.input_width()) {
      throw ShapeError("feature width " + std::to_string(x.cols()) + " != annotator input width " +
                       std::to_string(model_.input_width()));
    }
    std::vector<AnnotatedSample> out;
    if (x.rows() == 0) return out;
    const auto dists = mc_predict_batch(model_, x, mc_samples_, rng);
    out.reserve(dists.size());
    for (std::size_t i = 0; i < dists.size(); ++i) {
      out.push_back(detail::gate(i, from_distribution(dists[i]), truth, verify_));
    }
    return out;
  }

 private:
  Network model_;
  UncertaintyThreshold threshold_;
  std::size_t mc_samples_;
  bool verify_;
};

/// Returns the true label with zero uncertainty; a perfect human annotator.
class GroundTruthOracle {
 public:
  explicit GroundTruthOracle(std::size_t class_count) : classes_(class_count) {}

  std::vector<AnnotatedSample> annotate_batch(const RealMatrix& x, GroundTruth truth, Rng&) const {
    if (!truth) throw ArgumentError("ground-truth oracle called without labels");
    detail::check_truth(truth, x.rows());
    std::vector<AnnotatedSample> out;
    out.reserve(x.rows());
    for (std::size_t i = 0; i < x.rows(); ++i) {
      const std::size_t y = (*truth)[i];
      std::vector<double> onehot(classes_, 0.0);
      onehot.at(y) = 1.0;
      out.push_back({i, Annotation{y, 0.0, true, std::move(onehot)}, true, Verdict::accepted});
    }
    return out;
  }

 private:
  std::size_t classes_;
};

static_assert(LabelOracle<Annotator>);
static_assert(LabelOracle<GroundTruthOracle>);

// ---------------------------------------------------------------------------
// Uncertainty report: {correct, wrong} x {u < T, u >= T}

struct UQCounts {
  std::size_t mc_samples = 0;
  std::size_t correct_lt_t = 0;
  std::size_t correct_ge_t = 0;
  std::size_t wrong_lt_t = 0;
  std::size_t wrong_ge_t = 0;

  std::size_t total() const noexcept { return correct_lt_t + correct_ge_t + wrong_lt_t + wrong_ge_t; }
  friend bool operator==(const UQCounts&, const UQCounts&) = default;
};

using UQReport = std::vector<UQCounts>;

inline UQReport uq_report(const Annotator& a, const RealMatrix& x, std::span<const std::size_t> y,
                          std::span<const std::size_t> mc_settings, Rng& rng) {
  if (x.rows() == 0) throw ArgumentError("UQ report on an empty dataset");
  if (y.size() != x.rows()) {
    throw ShapeError(std::to_string(y.size()) + " labels for " + std::to_string(x.rows()) + " rows");
  }
  UQReport report;
  for (std::size_t samples : mc_settings) {
    const auto dists = mc_predict_batch(a.model(), x, samples, rng);
    UQCounts c;
    c.mc_samples = samples;
    for (std::size_t i = 0; i < dists.size(); ++i) {
      const bool correct = dists[i].predicted_label == y[i];
      const bool below = dists[i].entropy_bits < a.threshold().value_bits;
      if (correct) {
        ++(below ? c.correct_lt_t : c.correct_ge_t);
      } else {
        ++(below ? c.wrong_lt_t : c.wrong_ge_t);
      }
    }
    report.push_back(c);
  }
  return report;
}

inline void write_uq_csv(std::ostream& os, const UQReport& report) {
  os << "mc_samples,correct_lt_T,correct_ge_T,wrong_lt_T,wrong_ge_T\n";
  for (const auto& c : report) {
    os << c.mc_samples << ',' << c.correct_lt_t << ',' << c.correct_ge_t << ',' << c.wrong_lt_t
       << ',' << c.wrong_ge_t << '\n';
  }
}

}  // namespace ual

#endif  // UAL_ANNOTATOR_HPP
