#ifndef UAL_METRICS_HPP
#define UAL_METRICS_HPP

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "ual/data.hpp"
#include "ual/error.hpp"
#include "ual/matrix.hpp"

namespace ual {

/// Rows are true classes, columns predicted classes.
struct ConfusionMatrix {
  Matrix<std::size_t> counts;

  std::size_t classes() const noexcept { return counts.rows(); }
  std::size_t total() const {
    return std::accumulate(counts.data().begin(), counts.data().end(), std::size_t{0});
  }
  std::size_t trace() const {
    std::size_t t = 0;
    for (std::size_t c = 0; c < classes(); ++c) t += counts(c, c);
    return t;
  }
};

inline ConfusionMatrix confusion(std::span<const std::size_t> preds, std::span<const std::size_t> truth,
                                 std::size_t class_count) {
  if (preds.size() != truth.size()) {
    throw ArgumentError(std::to_string(preds.size()) + " predictions vs " + std::to_string(truth.size()) + " labels");
  }
  ConfusionMatrix cm{Matrix<std::size_t>(class_count, class_count)};
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (preds[i] >= class_count || truth[i] >= class_count) throw ArgumentError("label out of range");
    ++cm.counts(truth[i], preds[i]);
  }
  return cm;
}

struct ClassificationReport {
  std::vector<double> precision;
  std::vector<double> recall;
  std::vector<double> f1;
  std::vector<std::size_t> support;
  double accuracy = 0.0;
  std::vector<std::string> warnings;

  double macro_f1() const {
    return f1.empty() ? 0.0 : std::accumulate(f1.begin(), f1.end(), 0.0) / static_cast<double>(f1.size());
  }
};

/// Per-class precision/recall/F1. A zero denominator gives 0 and a warning.
inline ClassificationReport report(const ConfusionMatrix& cm) {
  const std::size_t total = cm.total();
  if (cm.classes() == 0 || total == 0) throw ArgumentError("report of an empty confusion matrix");
  const std::size_t k = cm.classes();
  ClassificationReport r;
  r.precision.assign(k, 0.0);
  r.recall.assign(k, 0.0);
  r.f1.assign(k, 0.0);
  r.support.assign(k, 0);
  for (std::size_t c = 0; c < k; ++c) {
    std::size_t row = 0;
    std::size_t col = 0;
    for (std::size_t j = 0; j < k; ++j) {
      row += cm.counts(c, j);
      col += cm.counts(j, c);
    }
    const auto tp = static_cast<double>(cm.counts(c, c));
    r.support[c] = row;
    if (col == 0) {
      r.warnings.push_back("class " + std::to_string(c) + ": precision undefined (never predicted)");
    } else {
      r.precision[c] = tp / static_cast<double>(col);
    }
    if (row == 0) {
      r.warnings.push_back("class " + std::to_string(c) + ": recall undefined (no true samples)");
    } else {
      r.recall[c] = tp / static_cast<double>(row);
    }
    const double denom = r.precision[c] + r.recall[c];
    r.f1[c] = denom > 0.0 ? 2.0 * r.precision[c] * r.recall[c] / denom : 0.0;
  }
  r.accuracy = static_cast<double>(cm.trace()) / static_cast<double>(total);
  return r;
}

/// One-vs-rest ROC AUC per class by the trapezoid rule over the ROC curve.
/// Tied scores form a single threshold step. A class with no positives or no
/// negatives has an undefined (nullopt) AUC.
inline std::vector<std::optional<double>> roc_auc_ovr(const RealMatrix& scores,
                                                      std::span<const std::size_t> truth) {
  if (scores.rows() != truth.size()) throw ArgumentError("score rows and labels differ in length");
  const std::size_t n = scores.rows();
  std::vector<std::optional<double>> auc(scores.cols());
  std::vector<std::size_t> order(n);
  for (std::size_t c = 0; c < scores.cols(); ++c) {
    std::size_t positives = 0;
    for (std::size_t y : truth) positives += y == c ? 1 : 0;
    const std::size_t negatives = n - positives;
    if (positives == 0 || negatives == 0) continue;

    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores(a, c) > scores(b, c); });
    double area = 0.0;
    double tp = 0.0;
    double fp = 0.0;
    double prev_tpr = 0.0;
    double prev_fpr = 0.0;
    for (std::size_t k = 0; k < n;) {
      const double s = scores(order[k], c);
      for (; k < n && scores(order[k], c) == s; ++k) {
        (truth[order[k]] == c ? tp : fp) += 1.0;
      }
      const double tpr = tp / static_cast<double>(positives);
      const double fpr = fp / static_cast<double>(negatives);
      area += (fpr - prev_fpr) * (tpr + prev_tpr) / 2.0;
      prev_tpr = tpr;
      prev_fpr = fpr;
    }
    auc[c] = area;
  }
  return auc;
}

/// Trapezoidal area of accuracy over labeled-set size, divided by the size
/// span. A single point returns its accuracy.
inline double learning_curve_summary(std::span<const double> labeled_sizes, std::span<const double> accuracies) {
  if (labeled_sizes.empty() || labeled_sizes.size() != accuracies.size()) {
    throw ArgumentError("learning curve needs matching, non-empty size and accuracy series");
  }
  const double span = labeled_sizes.back() - labeled_sizes.front();
  if (labeled_sizes.size() == 1 || span == 0.0) {
    return std::accumulate(accuracies.begin(), accuracies.end(), 0.0) / static_cast<double>(accuracies.size());
  }
  double area = 0.0;
  for (std::size_t i = 1; i < labeled_sizes.size(); ++i) {
    area += (labeled_sizes[i] - labeled_sizes[i - 1]) * (accuracies[i] + accuracies[i - 1]) / 2.0;
  }
  return area / span;
}

inline void write_report_csv(std::ostream& os, const ClassificationReport& r) {
  os << "class,precision,recall,f1,support\n";
  for (std::size_t c = 0; c < r.f1.size(); ++c) {
    os << c << ',' << format_real(r.precision[c]) << ',' << format_real(r.recall[c]) << ','
       << format_real(r.f1[c]) << ',' << r.support[c] << '\n';
  }
  const std::size_t total = std::accumulate(r.support.begin(), r.support.end(), std::size_t{0});
  os << "accuracy,,," << format_real(r.accuracy) << ',' << total << '\n';
}

inline void write_confusion_csv(std::ostream& os, const ConfusionMatrix& cm) {
  for (std::size_t i = 0; i < cm.classes(); ++i) {
    for (std::size_t j = 0; j < cm.classes(); ++j) os << (j ? "," : "") << cm.counts(i, j);
    os << '\n';
  }
}

inline void write_auc_csv(std::ostream& os, const std::vector<std::optional<double>>& auc) {
  os << "class,auc\n";
  for (std::size_t c = 0; c < auc.size(); ++c) {
    os << c << ',' << (auc[c] ? format_real(*auc[c]) : std::string("undefined")) << '\n';
  }
}

}  // namespace ual

#endif  // UAL_METRICS_HPP
