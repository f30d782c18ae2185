#ifndef UAL_EXPERIMENT_HPP
#define UAL_EXPERIMENT_HPP

// Declarative experiment description (JSON) and the commands the `ual`
// tool runs on it. Every random choice is derived from the global seed, so
// identical config + seed gives byte-identical output files.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <iomanip>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "ual/al_engine.hpp"
#include "ual/annotator.hpp"
#include "ual/checkpoint.hpp"
#include "ual/data.hpp"
#include "ual/error.hpp"
#include "ual/mc_dropout.hpp"
#include "ual/metrics.hpp"
#include "ual/nn.hpp"
#include "ual/query.hpp"

namespace ual {

namespace fs = std::filesystem;
using nlohmann::json;

struct ModelSpec {
  std::vector<std::size_t> hidden{64};
  Activation activation = Activation::leaky_relu;
  double leaky_slope = kDefaultLeakySlope;
  double dropout = 0.1;

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

struct AnnotatorSettings {
  ModelSpec model{};
  TrainConfig train{15, 128, 1e-3, 1e-4, true, 0};
  bool class_weighted = true;
  double threshold_fraction = 0.55;
  std::size_t mc_samples = kDefaultMcSamples;
  bool verify_labels = false;

  friend bool operator==(const AnnotatorSettings&, const AnnotatorSettings&) = default;
};

struct LearnerSettings {
  ModelSpec model{{32}, Activation::relu, kDefaultLeakySlope, 0.0};
  std::size_t mc_samples = 1;

  friend bool operator==(const LearnerSettings&, const LearnerSettings&) = default;
};

struct ExperimentConfig {
  std::uint64_t seed = 0;
  std::string output_dir = "out";
  std::optional<std::string> data_path;
  std::optional<BlobSpec> blobs;
  SplitSpec split{0.6, 0.3, 0.1, 300, true, 0};
  AnnotatorSettings annotator{};
  LearnerSettings learner{};
  ALConfig al{};
  bool al_class_weighted = false;
  std::vector<std::size_t> uq_mc_settings{kDefaultMcSettings.begin(), kDefaultMcSettings.end()};
  fs::path base_dir;  // relative paths resolve against this; not serialized

  fs::path resolve(const std::string& p) const {
    const fs::path path(p);
    return path.is_absolute() ? path : base_dir / path;
  }
  fs::path out_path(const std::string& file) const { return resolve(output_dir) / file; }
};

// ---------------------------------------------------------------------------
// JSON <-> config

namespace detail {

inline void allow_keys(const json& j, std::initializer_list<const char*> keys, const std::string& where) {
  if (!j.is_object()) throw ParseError("'" + where + "' must be an object", 0);
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [k, v] : j.items()) {
    if (!allowed.count(k)) throw ParseError("unknown key '" + k + "' in '" + where + "'", 0);
  }
}

template <typename T>
void read_opt(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

inline json model_to_json(const ModelSpec& m) {
  return {{"hidden", m.hidden},
          {"activation", std::string(to_string(m.activation))},
          {"leaky_slope", m.leaky_slope},
          {"dropout", m.dropout}};
}

inline void model_from_json(const json& j, ModelSpec& m, const std::string& where) {
  read_opt(j, "hidden", m.hidden);
  if (j.contains("activation")) m.activation = parse_activation(j.at("activation").get<std::string>());
  read_opt(j, "leaky_slope", m.leaky_slope);
  read_opt(j, "dropout", m.dropout);
  if (m.activation == Activation::softmax) throw ParseError("'" + where + ".activation' cannot be softmax", 0);
}

inline json train_to_json(const TrainConfig& t) {
  return {{"epochs", t.epochs}, {"batch_size", t.batch_size}, {"learning_rate", t.learning_rate},
          {"l2", t.l2}, {"dropout_active", t.dropout_active}};
}

inline void train_from_json(const json& j, TrainConfig& t, const std::string& where) {
  allow_keys(j, {"epochs", "batch_size", "learning_rate", "l2", "dropout_active"}, where);
  read_opt(j, "epochs", t.epochs);
  read_opt(j, "batch_size", t.batch_size);
  read_opt(j, "learning_rate", t.learning_rate);
  read_opt(j, "l2", t.l2);
  read_opt(j, "dropout_active", t.dropout_active);
}

}  // namespace detail

inline json to_json(const ExperimentConfig& c) {
  json data = json::object();
  if (c.data_path) data["path"] = *c.data_path;
  if (c.blobs) {
    data["blobs"] = {{"classes", c.blobs->class_count},      {"dim", c.blobs->dim},
                     {"per_class", c.blobs->per_class_counts}, {"spread", c.blobs->class_center_spread},
                     {"std", c.blobs->within_class_std},       {"seed", c.blobs->seed}};
  }
  json annotator = detail::model_to_json(c.annotator.model);
  annotator["train"] = detail::train_to_json(c.annotator.train);
  annotator["class_weighted"] = c.annotator.class_weighted;
  annotator["threshold_fraction"] = c.annotator.threshold_fraction;
  annotator["mc_samples"] = c.annotator.mc_samples;
  annotator["verify_labels"] = c.annotator.verify_labels;

  json learner = detail::model_to_json(c.learner.model);
  learner["mc_samples"] = c.learner.mc_samples;

  return {
      {"seed", c.seed},
      {"output_dir", c.output_dir},
      {"data", data},
      {"split",
       {{"train", c.split.train_fraction},
        {"val", c.split.val_fraction},
        {"test", c.split.test_fraction},
        {"val_labeled", c.split.val_labeled_count},
        {"stratified", c.split.stratified}}},
      {"annotator", annotator},
      {"learner", learner},
      {"al",
       {{"strategy", std::string(to_string(c.al.strategy))},
        {"initial_labeled", c.al.initial_labeled},
        {"query_batch", c.al.query_batch},
        {"max_queries", c.al.max_queries},
        {"committee_size", c.al.committee_size},
        {"loss_schedule", std::string(to_string(c.al.loss_schedule))},
        {"focal_alpha", c.al.focal.alpha},
        {"focal_gamma", c.al.focal.gamma},
        {"class_weighted", c.al_class_weighted},
        {"warm_start", c.al.warm_start},
        {"retrain", detail::train_to_json(c.al.retrain)}}},
      {"uq", {{"mc_settings", c.uq_mc_settings}}},
  };
}

/// Structural check of everything that can be checked without touching disk.
inline void validate(const ExperimentConfig& c) {
  if (c.data_path.has_value() == c.blobs.has_value()) {
    throw ArgumentError("data needs exactly one of 'path' or 'blobs'");
  }
  if (c.blobs) c.blobs->validate();
  const SplitSpec& s = c.split;
  for (double f : {s.train_fraction, s.val_fraction, s.test_fraction}) {
    if (!(f > 0.0)) throw ArgumentError("split fractions must be positive");
  }
  if (std::abs(s.train_fraction + s.val_fraction + s.test_fraction - 1.0) > 1e-9) {
    throw ArgumentError("split fractions must sum to 1");
  }
  for (const ModelSpec* m : {&c.annotator.model, &c.learner.model}) {
    if (!(m->dropout >= 0.0 && m->dropout < 1.0)) throw ArgumentError("dropout must be in [0, 1)");
    for (std::size_t h : m->hidden) {
      if (h == 0) throw ArgumentError("hidden widths must be positive");
    }
  }
  c.annotator.train.validate();
  if (!(c.annotator.threshold_fraction > 0.0 && c.annotator.threshold_fraction <= 1.0)) {
    throw ArgumentError("threshold_fraction must be in (0, 1]");
  }
  if (c.annotator.mc_samples < 1) throw ArgumentError("annotator.mc_samples must be >= 1");
  c.al.validate(c.al.strategy == StrategyKind::vote_entropy);
  if (c.uq_mc_settings.empty()) throw ArgumentError("uq.mc_settings must not be empty");
  for (std::size_t s : c.uq_mc_settings) {
    if (s < 1) throw ArgumentError("uq.mc_settings entries must be >= 1");
  }
  if (c.output_dir.empty()) throw ArgumentError("output_dir must not be empty");
}

inline ExperimentConfig config_from_json(const json& j, fs::path base_dir = {}) {
  ExperimentConfig c;
  c.base_dir = std::move(base_dir);
  try {
    detail::allow_keys(j, {"seed", "output_dir", "data", "split", "annotator", "learner", "al", "uq"}, "config");
    detail::read_opt(j, "seed", c.seed);
    detail::read_opt(j, "output_dir", c.output_dir);

    const json& data = j.at("data");
    detail::allow_keys(data, {"path", "blobs"}, "data");
    if (data.contains("path")) c.data_path = data.at("path").get<std::string>();
    if (data.contains("blobs")) {
      const json& b = data.at("blobs");
      detail::allow_keys(b, {"classes", "dim", "per_class", "spread", "std", "seed"}, "data.blobs");
      BlobSpec spec;
      spec.class_count = b.at("classes").get<std::size_t>();
      spec.dim = b.at("dim").get<std::size_t>();
      const json& pc = b.at("per_class");
      if (pc.is_array()) {
        spec.per_class_counts = pc.get<std::vector<std::size_t>>();
      } else {
        spec.per_class_counts.assign(spec.class_count, pc.get<std::size_t>());
      }
      detail::read_opt(b, "spread", spec.class_center_spread);
      detail::read_opt(b, "std", spec.within_class_std);
      detail::read_opt(b, "seed", spec.seed);
      c.blobs = spec;
    }

    if (j.contains("split")) {
      const json& s = j.at("split");
      detail::allow_keys(s, {"train", "val", "test", "val_labeled", "stratified"}, "split");
      detail::read_opt(s, "train", c.split.train_fraction);
      detail::read_opt(s, "val", c.split.val_fraction);
      detail::read_opt(s, "test", c.split.test_fraction);
      detail::read_opt(s, "val_labeled", c.split.val_labeled_count);
      detail::read_opt(s, "stratified", c.split.stratified);
    }

    if (j.contains("annotator")) {
      const json& a = j.at("annotator");
      detail::allow_keys(a, {"hidden", "activation", "leaky_slope", "dropout", "train", "class_weighted",
                             "threshold_fraction", "mc_samples", "verify_labels"},
                         "annotator");
      detail::model_from_json(a, c.annotator.model, "annotator");
      if (a.contains("train")) detail::train_from_json(a.at("train"), c.annotator.train, "annotator.train");
      detail::read_opt(a, "class_weighted", c.annotator.class_weighted);
      detail::read_opt(a, "threshold_fraction", c.annotator.threshold_fraction);
      detail::read_opt(a, "mc_samples", c.annotator.mc_samples);
      detail::read_opt(a, "verify_labels", c.annotator.verify_labels);
    }

    if (j.contains("learner")) {
      const json& l = j.at("learner");
      detail::allow_keys(l, {"hidden", "activation", "leaky_slope", "dropout", "mc_samples"}, "learner");
      detail::model_from_json(l, c.learner.model, "learner");
      detail::read_opt(l, "mc_samples", c.learner.mc_samples);
    }

    if (j.contains("al")) {
      const json& a = j.at("al");
      detail::allow_keys(a, {"strategy", "initial_labeled", "query_batch", "max_queries", "committee_size",
                             "loss_schedule", "focal_alpha", "focal_gamma", "class_weighted", "warm_start",
                             "retrain"},
                         "al");
      if (a.contains("strategy")) c.al.strategy = parse_strategy(a.at("strategy").get<std::string>());
      detail::read_opt(a, "initial_labeled", c.al.initial_labeled);
      detail::read_opt(a, "query_batch", c.al.query_batch);
      detail::read_opt(a, "max_queries", c.al.max_queries);
      detail::read_opt(a, "committee_size", c.al.committee_size);
      if (a.contains("loss_schedule")) {
        c.al.loss_schedule = parse_loss_schedule(a.at("loss_schedule").get<std::string>());
      }
      detail::read_opt(a, "focal_alpha", c.al.focal.alpha);
      detail::read_opt(a, "focal_gamma", c.al.focal.gamma);
      detail::read_opt(a, "class_weighted", c.al_class_weighted);
      detail::read_opt(a, "warm_start", c.al.warm_start);
      if (a.contains("retrain")) detail::train_from_json(a.at("retrain"), c.al.retrain, "al.retrain");
    }

    if (j.contains("uq")) {
      const json& u = j.at("uq");
      detail::allow_keys(u, {"mc_settings"}, "uq");
      detail::read_opt(u, "mc_settings", c.uq_mc_settings);
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("config: ") + e.what(), 0);
  }
  return c;
}

inline ExperimentConfig load_config(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open config '" + path.string() + "'");
  json j;
  try {
    j = json::parse(is);
  } catch (const json::parse_error& e) {
    throw ParseError("config '" + path.string() + "': " + e.what(), 0);
  }
  return config_from_json(j, path.parent_path());
}

inline void save_config(const ExperimentConfig& c, std::ostream& os) { os << std::setw(2) << to_json(c) << '\n'; }

// ---------------------------------------------------------------------------
// Command-line overrides

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<std::string> strategy;
  std::optional<std::size_t> mc_samples;
  std::optional<double> threshold_fraction;
  std::optional<double> dropout;
  bool verify_labels = false;
};

/// --out-dir is taken relative to the working directory, not the config.
inline void apply(ExperimentConfig& c, const Overrides& o) {
  if (o.seed) c.seed = *o.seed;
  if (o.out_dir) c.output_dir = fs::absolute(*o.out_dir).string();
  if (o.strategy) c.al.strategy = parse_strategy(*o.strategy);
  if (o.mc_samples) c.annotator.mc_samples = *o.mc_samples;
  if (o.threshold_fraction) c.annotator.threshold_fraction = *o.threshold_fraction;
  if (o.dropout) c.annotator.model.dropout = *o.dropout;
  if (o.verify_labels) c.annotator.verify_labels = true;
}

// ---------------------------------------------------------------------------
// Seed streams

enum class SeedStream : std::uint64_t { split = 1, annotator_init, annotator_train, learner_init, al, uq, evaluate };

inline std::uint64_t seed_for(const ExperimentConfig& c, SeedStream s) {
  return derive_seed(c.seed, static_cast<std::uint64_t>(s));
}

// ---------------------------------------------------------------------------
// Shared plumbing

struct PreparedData {
  Dataset data;
  Splits splits;
};

inline PreparedData prepare_data(const ExperimentConfig& c) {
  PreparedData p;
  p.data = c.data_path ? load_features(c.resolve(*c.data_path).string()) : gen_blobs(*c.blobs);
  SplitSpec spec = c.split;
  spec.seed = seed_for(c, SeedStream::split);
  p.splits = split(p.data, spec);
  return p;
}

inline fs::path annotator_checkpoint_path(const ExperimentConfig& c) { return c.out_path("annotator.ualnet"); }

inline Network build_model(const ModelSpec& m, std::size_t input_width, std::size_t classes, std::uint64_t seed) {
  return make_classifier(input_width, m.hidden, classes, m.activation, m.dropout, seed, m.leaky_slope);
}

/// Loads the annotator and checks it against the data before anything is written.
inline Network load_annotator_model(const ExperimentConfig& c, const Dataset& data) {
  Network net = load_checkpoint(annotator_checkpoint_path(c).string());
  if (net.input_width() != data.dim()) {
    throw ShapeError("annotator checkpoint expects " + std::to_string(net.input_width()) +
                     " features but the data has " + std::to_string(data.dim()));
  }
  if (net.class_count() != data.class_count) {
    throw ShapeError("annotator checkpoint predicts " + std::to_string(net.class_count()) +
                     " classes but the data has " + std::to_string(data.class_count));
  }
  net.set_hidden_dropout(c.annotator.model.dropout);
  return net;
}

inline Annotator make_annotator(const ExperimentConfig& c, Network model) {
  const std::size_t classes = model.class_count();
  return Annotator(std::move(model), threshold_from_fraction(classes, c.annotator.threshold_fraction),
                   c.annotator.mc_samples, c.annotator.verify_labels);
}

template <typename Fn>
void write_file(const fs::path& path, Fn&& fn) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
  fn(os);
  if (!os) throw IoError("failed writing '" + path.string() + "'");
}

inline void ensure_output_dir(const ExperimentConfig& c) {
  std::error_code ec;
  fs::create_directories(c.resolve(c.output_dir), ec);
  if (ec) throw IoError("cannot create output directory '" + c.resolve(c.output_dir).string() + "': " + ec.message());
}

inline std::string percent(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(0) << v * 100.0 << '%';
  return os.str();
}

// ---------------------------------------------------------------------------
// Commands

inline Dataset cmd_gen_data(const BlobSpec& spec, const fs::path& out, std::ostream& log) {
  spec.validate();
  Dataset ds = gen_blobs(spec);
  save_features(ds, out.string());
  log << "N=" << ds.size() << " d=" << ds.dim() << " C=" << ds.class_count << " counts=";
  const auto counts = ds.class_counts();
  for (std::size_t k = 0; k < counts.size(); ++k) log << (k ? "," : "") << counts[k];
  log << '\n';
  return ds;
}

struct TrainAnnotatorResult {
  Network model;
  TrainHistory history;
  double test_accuracy = 0.0;
};

inline TrainAnnotatorResult cmd_train_annotator(const ExperimentConfig& c, std::ostream& log) {
  validate(c);
  const PreparedData p = prepare_data(c);
  const Dataset train_set = p.data.subset(p.splits.train);
  const Dataset test_set = p.data.subset(p.splits.test);

  Network net = build_model(c.annotator.model, p.data.dim(), p.data.class_count, seed_for(c, SeedStream::annotator_init));
  TrainConfig tc = c.annotator.train;
  tc.seed = seed_for(c, SeedStream::annotator_train);
  const LossKind loss = CrossEntropy{c.annotator.class_weighted ? class_weights(train_set) : std::vector<double>{}};

  ensure_output_dir(c);
  TrainAnnotatorResult r{net, {}, 0.0};
  r.history = train(r.model, train_set.x, train_set.y, tc, loss);
  r.test_accuracy = accuracy(predict_labels(r.model, test_set.x), test_set.y);

  save_checkpoint(r.model, annotator_checkpoint_path(c).string());
  write_file(c.out_path("annotator_history.csv"), [&](std::ostream& os) {
    os << "epoch,loss,accuracy\n";
    for (const auto& e : r.history) os << e.epoch << ',' << format_real(e.loss) << ',' << format_real(e.accuracy) << '\n';
  });
  log << "trained annotator on " << train_set.size() << " samples: final train accuracy "
      << percent(r.history.back().accuracy) << ", test accuracy " << percent(r.test_accuracy) << '\n';
  return r;
}

struct RunAlResult {
  std::vector<RoundRecord> history;
  std::size_t rejected = 0;
  double final_accuracy = 0.0;
};

inline RunAlResult cmd_run_al(const ExperimentConfig& c, std::ostream& log) {
  validate(c);
  const PreparedData p = prepare_data(c);
  const Annotator annotator = make_annotator(c, load_annotator_model(c, p.data));
  const Dataset test_set = p.data.subset(p.splits.test);

  ALConfig al = c.al;
  al.seed = seed_for(c, SeedStream::al);
  al.learner_mc_samples = c.learner.mc_samples;
  if (c.al_class_weighted) {
    std::vector<std::size_t> seed_labels;
    for (std::size_t i : p.splits.val_labeled) seed_labels.push_back(p.data.y[i]);
    std::vector<std::size_t> counts(p.data.class_count, 0);
    for (std::size_t y : seed_labels) ++counts[y];
    al.class_weights = class_weights(std::span<const std::size_t>(counts));
  }
  const Network prototype =
      build_model(c.learner.model, p.data.dim(), p.data.class_count, seed_for(c, SeedStream::learner_init));
  ensure_output_dir(c);

  RunAlResult out;
  RealMatrix test_probs;
  if (al.strategy == StrategyKind::vote_entropy) {
    QbcResult r = run_qbc(p.data, p.splits, annotator, al, test_set, prototype);
    test_probs = qbc_predict_proba(r.committee, test_set.x);
    write_file(c.out_path("member_history.csv"), [&](std::ostream& os) { write_member_history_csv(os, r.member_history); });
    out.history = std::move(r.state.history);
    out.rejected = r.state.rejected.size();
    write_file(c.out_path("rejected.csv"), [&](std::ostream& os) {
      os << "index,round,reason\n";
      for (const auto& s : r.state.rejected) os << s.index << ',' << s.round << ',' << to_string(s.reason) << '\n';
    });
  } else {
    PoolBasedResult r = run_pool_based(p.data, p.splits, annotator, al, test_set, prototype);
    test_probs = predict_proba(r.model, test_set.x);
    out.history = std::move(r.state.history);
    out.rejected = r.state.rejected.size();
    write_file(c.out_path("rejected.csv"), [&](std::ostream& os) {
      os << "index,round,reason\n";
      for (const auto& s : r.state.rejected) os << s.index << ',' << s.round << ',' << to_string(s.reason) << '\n';
    });
  }

  const auto preds = argmax_rows(test_probs);
  const ConfusionMatrix cm = confusion(preds, test_set.y, p.data.class_count);
  const ClassificationReport rep = report(cm);
  out.final_accuracy = rep.accuracy;
  Rng uq_rng(seed_for(c, SeedStream::uq));
  const UQReport uq = uq_report(annotator, test_set.x, test_set.y, c.uq_mc_settings, uq_rng);

  write_file(c.out_path("learning_curve.csv"), [&](std::ostream& os) { write_learning_curve_csv(os, out.history, al.strategy); });
  write_file(c.out_path("confusion.csv"), [&](std::ostream& os) { write_confusion_csv(os, cm); });
  write_file(c.out_path("report.csv"), [&](std::ostream& os) { write_report_csv(os, rep); });
  write_file(c.out_path("auc.csv"), [&](std::ostream& os) { write_auc_csv(os, roc_auc_ovr(test_probs, test_set.y)); });
  write_file(c.out_path("uq_report.csv"), [&](std::ostream& os) { write_uq_csv(os, uq); });

  const auto& last = out.history.back();
  log << to_string(al.strategy) << ": " << last.round << " rounds, labeled set " << out.history.front().labeled_size
      << " -> " << last.labeled_size << ", " << out.rejected << " rejected, test accuracy "
      << percent(out.history.front().test_accuracy) << " -> " << percent(rep.accuracy) << '\n';
  return out;
}

struct EvaluateResult {
  ConfusionMatrix confusion;
  ClassificationReport report;
  std::vector<std::optional<double>> auc;
};

/// Annotator quality on the test split from MC-averaged probabilities.
inline EvaluateResult cmd_evaluate(const ExperimentConfig& c, std::ostream& log) {
  validate(c);
  const PreparedData p = prepare_data(c);
  const Network model = load_annotator_model(c, p.data);
  const Dataset test_set = p.data.subset(p.splits.test);
  ensure_output_dir(c);

  Rng rng(seed_for(c, SeedStream::evaluate));
  const RealMatrix probs = mean_probabilities(model, test_set.x, c.annotator.mc_samples, rng);
  EvaluateResult r;
  r.confusion = confusion(argmax_rows(probs), test_set.y, p.data.class_count);
  r.report = report(r.confusion);
  r.auc = roc_auc_ovr(probs, test_set.y);

  write_file(c.out_path("annotator_confusion.csv"), [&](std::ostream& os) { write_confusion_csv(os, r.confusion); });
  write_file(c.out_path("annotator_report.csv"), [&](std::ostream& os) { write_report_csv(os, r.report); });
  write_file(c.out_path("annotator_auc.csv"), [&](std::ostream& os) { write_auc_csv(os, r.auc); });

  log << "class  precision  recall  f1  support\n";
  for (std::size_t k = 0; k < r.report.f1.size(); ++k) {
    log << k << "  " << percent(r.report.precision[k]) << "  " << percent(r.report.recall[k]) << "  "
        << percent(r.report.f1[k]) << "  " << r.report.support[k] << '\n';
  }
  log << "accuracy " << percent(r.report.accuracy) << '\n';
  for (const auto& w : r.report.warnings) log << "warning: " << w << '\n';
  return r;
}

inline UQReport cmd_uq_report(const ExperimentConfig& c, std::ostream& log) {
  validate(c);
  const PreparedData p = prepare_data(c);
  const Annotator annotator = make_annotator(c, load_annotator_model(c, p.data));
  const Dataset test_set = p.data.subset(p.splits.test);
  ensure_output_dir(c);

  Rng rng(seed_for(c, SeedStream::uq));
  const UQReport uq = uq_report(annotator, test_set.x, test_set.y, c.uq_mc_settings, rng);
  write_file(c.out_path("uq_report.csv"), [&](std::ostream& os) { write_uq_csv(os, uq); });
  log << "T = " << annotator.threshold().value_bits << " bits\n";
  write_uq_csv(log, uq);
  return uq;
}

}  // namespace ual

#endif  // UAL_EXPERIMENT_HPP
