#ifndef UAL_DATA_HPP
#define UAL_DATA_HPP

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ual/error.hpp"
#include "ual/matrix.hpp"
#include "ual/random.hpp"

namespace ual {

struct Dataset {
  RealMatrix x;
  std::vector<std::size_t> y;
  std::size_t class_count = 0;

  std::size_t size() const noexcept { return y.size(); }
  std::size_t dim() const noexcept { return x.cols(); }

  std::vector<std::size_t> class_counts() const {
    std::vector<std::size_t> counts(class_count, 0);
    for (std::size_t label : y) ++counts.at(label);
    return counts;
  }

  void validate() const {
    if (y.empty() || x.cols() == 0) throw ArgumentError("dataset needs N >= 1 and d >= 1");
    if (x.rows() != y.size()) {
      throw ShapeError(std::to_string(x.rows()) + " feature rows but " + std::to_string(y.size()) + " labels");
    }
    if (class_count < 1) throw ArgumentError("dataset needs at least one class");
    for (std::size_t label : y) {
      if (label >= class_count) throw ArgumentError("label " + std::to_string(label) + " out of range");
    }
  }

  Dataset subset(std::span<const std::size_t> indices) const {
    Dataset out;
    out.x = x.select_rows(indices);
    out.y.reserve(indices.size());
    for (std::size_t i : indices) out.y.push_back(y.at(i));
    out.class_count = class_count;
    return out;
  }

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

// ---------------------------------------------------------------------------
// Splitting

struct SplitSpec {
  double train_fraction = 0.8;
  double val_fraction = 0.1;
  double test_fraction = 0.1;
  std::size_t val_labeled_count = 0;
  bool stratified = true;
  std::uint64_t seed = 0;

  friend bool operator==(const SplitSpec&, const SplitSpec&) = default;
};

/// Index sets into the source dataset. val_labeled and val_pool partition the
/// validation split.
struct Splits {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val_labeled;
  std::vector<std::size_t> val_pool;
  std::vector<std::size_t> test;
};

namespace detail {

/// Rounds each of values[i] up or down so the results sum to target; the
/// largest fractional parts round up, lowest index first on ties.
inline std::vector<std::size_t> apportion(const std::vector<double>& values, std::size_t target) {
  std::vector<std::size_t> out(values.size());
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    out[i] = static_cast<std::size_t>(std::floor(values[i] + 1e-9));
    assigned += out[i];
  }
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return values[a] - static_cast<double>(out[a]) > values[b] - static_cast<double>(out[b]);
  });
  for (std::size_t k = 0; assigned < target && k < order.size(); ++k) {
    ++out[order[k]];
    ++assigned;
  }
  return out;
}

}  // namespace detail

inline Splits split(const Dataset& ds, const SplitSpec& spec) {
  ds.validate();
  const double fr[3] = {spec.train_fraction, spec.val_fraction, spec.test_fraction};
  for (double f : fr) {
    if (!(f > 0.0)) throw ArgumentError("split fractions must be positive");
  }
  if (std::abs(fr[0] + fr[1] + fr[2] - 1.0) > 1e-9) throw ArgumentError("split fractions must sum to 1");

  const std::size_t n = ds.size();
  const auto n_train = static_cast<std::size_t>(std::llround(static_cast<double>(n) * fr[0]));
  const auto n_head = static_cast<std::size_t>(std::llround(static_cast<double>(n) * (fr[0] + fr[1])));
  if (n_head > n || n_train >= n_head || n_head >= n) {
    throw ArgumentError("dataset of " + std::to_string(n) + " rows is too small for these fractions");
  }
  if (spec.val_labeled_count > n_head - n_train) {
    throw ArgumentError("val_labeled_count exceeds the validation split size");
  }

  Rng rng(spec.seed);
  Splits out;
  std::vector<std::size_t> val;

  if (!spec.stratified) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    out.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
    val.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.begin() + static_cast<std::ptrdiff_t>(n_head));
    out.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_head), order.end());
    out.val_labeled.assign(val.begin(), val.begin() + static_cast<std::ptrdiff_t>(spec.val_labeled_count));
    out.val_pool.assign(val.begin() + static_cast<std::ptrdiff_t>(spec.val_labeled_count), val.end());
    return out;
  }

  // Per-class cut points at cumulative fractions keep every split within one
  // sample of its ideal share per class.
  const std::size_t classes = ds.class_count;
  std::vector<std::vector<std::size_t>> members(classes);
  for (std::size_t i = 0; i < n; ++i) members[ds.y[i]].push_back(i);
  std::vector<double> ideal_train(classes);
  std::vector<double> ideal_head(classes);
  for (std::size_t c = 0; c < classes; ++c) {
    const auto cnt = static_cast<double>(members[c].size());
    ideal_train[c] = cnt * fr[0];
    ideal_head[c] = cnt * (fr[0] + fr[1]);
  }
  const auto cut_train = detail::apportion(ideal_train, n_train);
  const auto cut_head = detail::apportion(ideal_head, n_head);

  std::vector<std::vector<std::size_t>> val_by_class(classes);
  for (std::size_t c = 0; c < classes; ++c) {
    auto& m = members[c];
    if (cut_train[c] == 0 || cut_head[c] <= cut_train[c] || cut_head[c] >= m.size()) {
      throw ArgumentError("class " + std::to_string(c) + " has too few samples (" +
                          std::to_string(m.size()) + ") to stratify");
    }
    std::shuffle(m.begin(), m.end(), rng);
    out.train.insert(out.train.end(), m.begin(), m.begin() + static_cast<std::ptrdiff_t>(cut_train[c]));
    val_by_class[c].assign(m.begin() + static_cast<std::ptrdiff_t>(cut_train[c]),
                           m.begin() + static_cast<std::ptrdiff_t>(cut_head[c]));
    out.test.insert(out.test.end(), m.begin() + static_cast<std::ptrdiff_t>(cut_head[c]), m.end());
  }

  // Labeled part of validation, again proportional to class share.
  std::vector<double> ideal_labeled(classes);
  const double val_total = static_cast<double>(n_head - n_train);
  for (std::size_t c = 0; c < classes; ++c) {
    ideal_labeled[c] = static_cast<double>(val_by_class[c].size()) * static_cast<double>(spec.val_labeled_count) / val_total;
  }
  const auto n_labeled = detail::apportion(ideal_labeled, spec.val_labeled_count);
  for (std::size_t c = 0; c < classes; ++c) {
    const auto& v = val_by_class[c];
    out.val_labeled.insert(out.val_labeled.end(), v.begin(), v.begin() + static_cast<std::ptrdiff_t>(n_labeled[c]));
    out.val_pool.insert(out.val_pool.end(), v.begin() + static_cast<std::ptrdiff_t>(n_labeled[c]), v.end());
  }

  // Interleave classes so downstream "first k" selections are not class-sorted.
  for (auto* part : {&out.train, &out.val_labeled, &out.val_pool, &out.test}) {
    std::shuffle(part->begin(), part->end(), rng);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Class weights: N / (C * count_c)

inline std::vector<double> class_weights(std::span<const std::size_t> counts) {
  if (counts.empty()) throw ArgumentError("no classes");
  const double n = static_cast<double>(std::accumulate(counts.begin(), counts.end(), std::size_t{0}));
  const double c = static_cast<double>(counts.size());
  std::vector<double> w(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i] == 0) throw ArgumentError("class " + std::to_string(i) + " has no samples");
    w[i] = n / (c * static_cast<double>(counts[i]));
  }
  return w;
}

inline std::vector<double> class_weights(const Dataset& ds) {
  const auto counts = ds.class_counts();
  return class_weights(std::span<const std::size_t>(counts));
}

// ---------------------------------------------------------------------------
// Synthetic Gaussian blobs

struct BlobSpec {
  std::size_t class_count = 2;
  std::size_t dim = 2;
  std::vector<std::size_t> per_class_counts;
  double class_center_spread = 1.0;
  double within_class_std = 1.0;
  std::uint64_t seed = 0;

  void validate() const {
    if (class_count < 1 || dim < 1) throw ArgumentError("blobs need class_count >= 1 and dim >= 1");
    if (per_class_counts.size() != class_count) {
      throw ArgumentError("per_class_counts must have one entry per class");
    }
    for (std::size_t c : per_class_counts) {
      if (c < 1) throw ArgumentError("every class needs at least one sample");
    }
    if (!(class_center_spread > 0.0) || !(within_class_std >= 0.0)) {
      throw ArgumentError("blob spread must be positive and std non-negative");
    }
  }

  friend bool operator==(const BlobSpec&, const BlobSpec&) = default;
};

/// Class centers ~ N(0, spread^2 I); samples = center + N(0, std^2 I).
/// Rows come out grouped by class.
inline Dataset gen_blobs(const BlobSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  std::normal_distribution<double> unit(0.0, 1.0);
  RealMatrix centers(spec.class_count, spec.dim);
  for (double& v : centers.data()) v = spec.class_center_spread * unit(rng);

  const std::size_t n = std::accumulate(spec.per_class_counts.begin(), spec.per_class_counts.end(), std::size_t{0});
  Dataset ds;
  ds.class_count = spec.class_count;
  ds.x = RealMatrix(n, spec.dim);
  ds.y.reserve(n);
  std::size_t row = 0;
  for (std::size_t c = 0; c < spec.class_count; ++c) {
    for (std::size_t k = 0; k < spec.per_class_counts[c]; ++k, ++row) {
      auto r = ds.x.row(row);
      for (std::size_t j = 0; j < spec.dim; ++j) r[j] = centers(c, j) + spec.within_class_std * unit(rng);
      ds.y.push_back(c);
    }
  }
  return ds;
}

// ---------------------------------------------------------------------------
// Feature CSV: "# classes=<C> dim=<d>" then rows of d reals and an integer label.

inline std::string format_real(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline void save_features(const Dataset& ds, std::ostream& os) {
  ds.validate();
  os << "# classes=" << ds.class_count << " dim=" << ds.dim() << '\n';
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (double v : ds.x.row(i)) os << format_real(v) << ',';
    os << ds.y[i] << '\n';
  }
}

inline void save_features(const Dataset& ds, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  save_features(ds, os);
  if (!os) throw IoError("failed writing '" + path + "'");
}

namespace detail {

template <typename T>
T parse_number(std::string_view field, std::size_t line, std::string_view what) {
  while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
  while (!field.empty() && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r')) field.remove_suffix(1);
  T value{};
  const auto res = std::from_chars(field.data(), field.data() + field.size(), value);
  if (field.empty() || res.ec != std::errc{} || res.ptr != field.data() + field.size()) {
    throw ParseError("invalid " + std::string(what) + " '" + std::string(field) + "'", line);
  }
  return value;
}

}  // namespace detail

inline Dataset load_features(std::istream& is) {
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(is, line)) throw ParseError("empty feature file", 1);
  std::size_t classes = 0;
  std::size_t dim = 0;
  {
    std::istringstream header(line);
    std::string hash, c_tok, d_tok;
    header >> hash >> c_tok >> d_tok;
    if (hash != "#" || c_tok.rfind("classes=", 0) != 0 || d_tok.rfind("dim=", 0) != 0) {
      throw ParseError("expected header '# classes=<C> dim=<d>'", 1);
    }
    classes = detail::parse_number<std::size_t>(std::string_view(c_tok).substr(8), 1, "class count");
    dim = detail::parse_number<std::size_t>(std::string_view(d_tok).substr(4), 1, "dimension");
    if (classes < 1 || dim < 1) throw ParseError("header needs classes >= 1 and dim >= 1", 1);
  }

  Dataset ds;
  ds.class_count = classes;
  std::vector<double> values;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string_view> fields;
    std::string_view rest(line);
    for (;;) {
      const auto comma = rest.find(',');
      fields.push_back(rest.substr(0, comma));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (fields.size() != dim + 1) {
      throw ParseError("expected " + std::to_string(dim + 1) + " columns, found " + std::to_string(fields.size()), line_no);
    }
    for (std::size_t j = 0; j < dim; ++j) {
      const double v = detail::parse_number<double>(fields[j], line_no, "real");
      if (!std::isfinite(v)) throw ParseError("non-finite feature value", line_no);
      values.push_back(v);
    }
    const auto label = detail::parse_number<std::size_t>(fields[dim], line_no, "label");
    if (label >= classes) {
      throw ParseError("label " + std::to_string(label) + " out of range for " + std::to_string(classes) + " classes", line_no);
    }
    ds.y.push_back(label);
  }
  if (ds.y.empty()) throw ParseError("feature file has no data rows", line_no);
  ds.x = RealMatrix(ds.y.size(), dim, std::move(values));
  return ds;
}

inline Dataset load_features(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open feature file '" + path + "'");
  return load_features(is);
}

}  // namespace ual

#endif  // UAL_DATA_HPP
