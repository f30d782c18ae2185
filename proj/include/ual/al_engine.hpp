#ifndef UAL_AL_ENGINE_HPP
#define UAL_AL_ENGINE_HPP

// Pool-based sampling and query-by-committee loops. Both share one round
// structure: score the pool, take the top query_batch, ask the oracle,
// move accepted samples into the labeled set, drop everything queried from
// the pool, retrain, evaluate.

#include <algorithm>
#include <cstdint>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ual/annotator.hpp"
#include "ual/data.hpp"
#include "ual/error.hpp"
#include "ual/matrix.hpp"
#include "ual/mc_dropout.hpp"
#include "ual/metrics.hpp"
#include "ual/nn.hpp"
#include "ual/query.hpp"
#include "ual/random.hpp"

namespace ual {

enum class LossSchedule { cross_entropy_only, focal_only, cross_entropy_then_focal };

inline std::string_view to_string(LossSchedule s) {
  switch (s) {
    case LossSchedule::cross_entropy_only: return "cross_entropy_only";
    case LossSchedule::focal_only: return "focal_only";
    case LossSchedule::cross_entropy_then_focal: return "cross_entropy_then_focal";
  }
  return "unknown";
}

inline LossSchedule parse_loss_schedule(std::string_view name) {
  for (auto s : {LossSchedule::cross_entropy_only, LossSchedule::focal_only,
                 LossSchedule::cross_entropy_then_focal}) {
    if (to_string(s) == name) return s;
  }
  throw ArgumentError("unknown loss schedule '" + std::string(name) + "'");
}

/// Round 0 is the initial fit; rounds >= 1 are retrains.
inline LossKind loss_schedule_step(std::size_t round, LossSchedule schedule,
                                   std::vector<double> class_weights = {}, Focal focal = {}) {
  switch (schedule) {
    case LossSchedule::cross_entropy_only: return CrossEntropy{std::move(class_weights)};
    case LossSchedule::focal_only: return focal;
    case LossSchedule::cross_entropy_then_focal:
      if (round == 0) return CrossEntropy{std::move(class_weights)};
      return focal;
  }
  return CrossEntropy{};
}

struct ALConfig {
  StrategyKind strategy = StrategyKind::entropy;
  std::size_t initial_labeled = 100;
  std::size_t query_batch = 10;
  std::size_t max_queries = 50;
  std::size_t committee_size = 3;
  TrainConfig retrain{};
  LossSchedule loss_schedule = LossSchedule::cross_entropy_only;
  std::vector<double> class_weights;  // empty means unweighted cross-entropy
  Focal focal{};
  bool warm_start = true;
  std::size_t learner_mc_samples = 1;  // <= 1 scores with deterministic passes
  std::uint64_t seed = 0;

  /// 10 per round, 50 rounds: 500 new labels.
  static ALConfig binary_profile() { return ALConfig{}; }

  /// 16 per round until 1200 new labels: 75 rounds.
  static ALConfig multiclass_profile() {
    ALConfig c;
    c.query_batch = 16;
    c.max_queries = 1200 / 16;
    c.loss_schedule = LossSchedule::cross_entropy_then_focal;
    return c;
  }

  void validate(bool committee) const {
    if (query_batch < 1) throw ArgumentError("query_batch must be >= 1");
    if (max_queries < 1) throw ArgumentError("max_queries must be >= 1");
    if (initial_labeled < 1) throw ArgumentError("initial labeled set must not be empty");
    if (committee && committee_size < 2) throw ArgumentError("a committee needs at least 2 members");
    if (committee && strategy != StrategyKind::vote_entropy && strategy != StrategyKind::random) {
      throw ArgumentError("query-by-committee scores with vote_entropy (or random)");
    }
    if (!committee && strategy == StrategyKind::vote_entropy) {
      throw ArgumentError("vote_entropy requires a committee");
    }
    retrain.validate();
  }
};

struct LabeledSample {
  std::size_t index = 0;  // row in the source dataset
  std::size_t label = 0;  // as assigned by the oracle

  friend bool operator==(const LabeledSample&, const LabeledSample&) = default;
};

struct RoundRecord {
  std::size_t round = 0;
  std::size_t labeled_size = 0;
  std::size_t accepted = 0;
  std::size_t abstained = 0;  // every queried sample that was not accepted
  double test_accuracy = 0.0;
  std::string loss_kind;

  friend bool operator==(const RoundRecord&, const RoundRecord&) = default;
};

struct RejectedSample {
  std::size_t index = 0;
  std::size_t round = 0;
  Verdict reason = Verdict::abstained;

  friend bool operator==(const RejectedSample&, const RejectedSample&) = default;
};

struct ALState {
  std::vector<LabeledSample> labeled;
  std::vector<std::size_t> pool;
  std::size_t round = 0;
  std::vector<RoundRecord> history;
  std::vector<RejectedSample> rejected;

  std::size_t total_accepted() const {
    std::size_t n = 0;
    for (const auto& r : history) n += r.accepted;
    return n;
  }
};

struct PoolBasedResult {
  ALState state;
  Network model;
};

struct Committee {
  std::vector<Network> members;
  std::vector<std::uint64_t> member_seeds;
};

struct MemberRecord {
  std::size_t round = 0;
  std::size_t member = 0;
  std::size_t training_size = 0;
  double test_accuracy = 0.0;
};

struct QbcResult {
  ALState state;
  Committee committee;
  std::vector<std::vector<LabeledSample>> member_sets;
  std::vector<MemberRecord> member_history;
};

inline double accuracy(std::span<const std::size_t> preds, std::span<const std::size_t> truth) {
  if (preds.size() != truth.size() || preds.empty()) throw ArgumentError("accuracy needs matching non-empty inputs");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) hits += preds[i] == truth[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(preds.size());
}

/// Averaged member probabilities (dropout disabled).
inline RealMatrix qbc_predict_proba(const Committee& c, const RealMatrix& x) {
  if (c.members.empty()) throw ArgumentError("empty committee");
  RealMatrix mean = predict_proba(c.members.front(), x);
  for (std::size_t m = 1; m < c.members.size(); ++m) {
    const RealMatrix p = predict_proba(c.members[m], x);
    auto md = mean.data();
    const auto pd = p.data();
    for (std::size_t k = 0; k < md.size(); ++k) md[k] += pd[k];
  }
  for (double& v : mean.data()) v /= static_cast<double>(c.members.size());
  return mean;
}

inline std::pair<std::size_t, std::vector<double>> qbc_predict(const Committee& c, std::span<const double> x) {
  if (c.members.empty()) throw ArgumentError("empty committee");
  if (x.size() != c.members.front().input_width()) {
    throw ShapeError("feature width " + std::to_string(x.size()) + " != committee input width " +
                     std::to_string(c.members.front().input_width()));
  }
  const RealMatrix row(1, x.size(), std::vector<double>(x.begin(), x.end()));
  const RealMatrix mean = qbc_predict_proba(c, row);
  std::vector<double> probs(mean.row(0).begin(), mean.row(0).end());
  return {argmax(probs), std::move(probs)};
}

inline std::vector<std::size_t> argmax_rows(const RealMatrix& probs) {
  std::vector<std::size_t> labels(probs.rows());
  for (std::size_t i = 0; i < probs.rows(); ++i) labels[i] = argmax(probs.row(i));
  return labels;
}

inline double area_under_learning_curve(const std::vector<RoundRecord>& history) {
  std::vector<double> sizes;
  std::vector<double> acc;
  for (const auto& r : history) {
    sizes.push_back(static_cast<double>(r.labeled_size));
    acc.push_back(r.test_accuracy);
  }
  return learning_curve_summary(sizes, acc);
}

inline void write_learning_curve_csv(std::ostream& os, const std::vector<RoundRecord>& history,
                                     StrategyKind strategy) {
  os << "round,labeled_size,accepted,abstained,test_accuracy,strategy,loss_kind\n";
  for (const auto& r : history) {
    os << r.round << ',' << r.labeled_size << ',' << r.accepted << ',' << r.abstained << ','
       << format_real(r.test_accuracy) << ',' << to_string(strategy) << ',' << r.loss_kind << '\n';
  }
}

namespace detail {

inline void check_al_inputs(const Dataset& data, const Splits& splits, const Dataset& test,
                            const Network& prototype) {
  data.validate();
  test.validate();
  if (test.dim() != data.dim()) throw ShapeError("test features have a different width than the pool");
  if (prototype.input_width() != data.dim()) {
    throw ShapeError("learner input width " + std::to_string(prototype.input_width()) +
                     " != feature width " + std::to_string(data.dim()));
  }
  if (prototype.class_count() != data.class_count) {
    throw ShapeError("learner predicts " + std::to_string(prototype.class_count()) + " classes, data has " +
                     std::to_string(data.class_count));
  }
  std::vector<char> seen(data.size(), 0);
  for (const auto* part : {&splits.val_labeled, &splits.val_pool}) {
    for (std::size_t i : *part) {
      if (i >= data.size()) throw ArgumentError("split index out of range");
      if (seen[i]) throw ArgumentError("labeled and pool splits overlap");
      seen[i] = 1;
    }
  }
}

/// labeled ∩ pool = ∅; a violation is a bug in the loop, not bad input.
inline void assert_disjoint(const ALState& s, std::size_t n) {
  std::vector<char> in_labeled(n, 0);
  for (const auto& l : s.labeled) in_labeled[l.index] = 1;
  for (std::size_t i : s.pool) {
    if (in_labeled[i]) throw std::logic_error("sample " + std::to_string(i) + " is both labeled and in the pool");
  }
}

inline RealMatrix rows_of(const Dataset& data, const std::vector<LabeledSample>& set, std::vector<std::size_t>& labels) {
  std::vector<std::size_t> idx;
  idx.reserve(set.size());
  labels.clear();
  for (const auto& s : set) {
    idx.push_back(s.index);
    labels.push_back(s.label);
  }
  return data.x.select_rows(idx);
}

inline void fit(Network& net, const Dataset& data, const std::vector<LabeledSample>& set, const ALConfig& cfg,
                std::size_t round, std::uint64_t stream) {
  if (!cfg.warm_start && round > 0) net.reinitialize(net.seed());
  std::vector<std::size_t> labels;
  const RealMatrix x = rows_of(data, set, labels);
  TrainConfig tc = cfg.retrain;
  tc.seed = derive_seed(cfg.retrain.seed, stream * 1'000'003ULL + round);
  train(net, x, labels, tc, loss_schedule_step(round, cfg.loss_schedule, cfg.class_weights, cfg.focal));
}

/// Queries `picks` (positions in state.pool) and moves them out of the pool.
template <LabelOracle Oracle>
std::vector<LabeledSample> query_round(ALState& state, const Dataset& data, const std::vector<std::size_t>& picks,
                                       const Oracle& oracle, Rng& rng, RoundRecord& record) {
  std::vector<std::size_t> queried;
  queried.reserve(picks.size());
  for (std::size_t p : picks) queried.push_back(state.pool[p]);
  const RealMatrix xq = data.x.select_rows(queried);
  std::vector<std::size_t> truth;
  for (std::size_t i : queried) truth.push_back(data.y[i]);

  const auto answers = oracle.annotate_batch(xq, std::span<const std::size_t>(truth), rng);
  if (answers.size() != queried.size()) throw std::logic_error("oracle returned the wrong number of answers");

  std::vector<LabeledSample> added;
  for (const auto& a : answers) {
    const std::size_t idx = queried.at(a.index);
    if (a.accepted) {
      if (a.annotation.label >= data.class_count) throw ArgumentError("oracle returned an out-of-range label");
      added.push_back({idx, a.annotation.label});
      ++record.accepted;
    } else {
      state.rejected.push_back({idx, state.round, a.verdict});
      ++record.abstained;
    }
  }
  state.labeled.insert(state.labeled.end(), added.begin(), added.end());

  std::vector<char> drop(state.pool.size(), 0);
  for (std::size_t p : picks) drop[p] = 1;
  std::vector<std::size_t> remaining;
  remaining.reserve(state.pool.size() - picks.size());
  for (std::size_t k = 0; k < state.pool.size(); ++k) {
    if (!drop[k]) remaining.push_back(state.pool[k]);
  }
  state.pool = std::move(remaining);
  return added;
}

}  // namespace detail

/// Pool-based sampling. The learner starts from `learner` (its architecture
/// and initial weights) and is fitted on the first cfg.initial_labeled
/// entries of splits.val_labeled; splits.val_pool is the unlabeled pool.
/// Runs while the pool is non-empty and fewer than cfg.max_queries rounds
/// have been made.
template <LabelOracle Oracle>
PoolBasedResult run_pool_based(const Dataset& data, const Splits& splits, const Oracle& oracle,
                               const ALConfig& cfg, const Dataset& test, Network learner) {
  cfg.validate(false);
  detail::check_al_inputs(data, splits, test, learner);
  if (splits.val_labeled.size() < cfg.initial_labeled) {
    throw ArgumentError("need " + std::to_string(cfg.initial_labeled) + " initial labeled samples, have " +
                        std::to_string(splits.val_labeled.size()));
  }
  if (splits.val_pool.empty()) throw ArgumentError("the unlabeled pool is empty");

  ALState state;
  for (std::size_t k = 0; k < cfg.initial_labeled; ++k) {
    const std::size_t i = splits.val_labeled[k];
    state.labeled.push_back({i, data.y[i]});
  }
  state.pool = splits.val_pool;
  Rng rng = derive_rng(cfg.seed, 0);

  auto evaluate = [&]() { return accuracy(predict_labels(learner, test.x), test.y); };

  detail::fit(learner, data, state.labeled, cfg, 0, 0);
  state.history.push_back({0, state.labeled.size(), 0, 0, evaluate(),
                           loss_name(loss_schedule_step(0, cfg.loss_schedule))});

  while (!state.pool.empty() && state.round < cfg.max_queries) {
    ++state.round;
    RoundRecord record;
    record.round = state.round;

    const RealMatrix pool_x = data.x.select_rows(state.pool);
    const RealMatrix probs = mean_probabilities(learner, pool_x, cfg.learner_mc_samples, rng);
    const QueryScores scores = score_probabilities(cfg.strategy, probs, rng);
    const auto picks = select_top_k(scores, cfg.query_batch);
    detail::query_round(state, data, picks, oracle, rng, record);

    detail::fit(learner, data, state.labeled, cfg, state.round, 0);
    record.labeled_size = state.labeled.size();
    record.test_accuracy = evaluate();
    record.loss_kind = loss_name(loss_schedule_step(state.round, cfg.loss_schedule));
    state.history.push_back(record);
    detail::assert_disjoint(state, data.size());
  }
  return {std::move(state), std::move(learner)};
}

/// Query-by-committee. Member m is seeded with val_labeled entries
/// [m * initial_labeled, (m + 1) * initial_labeled), so seeds are disjoint.
/// Every accepted sample is added to every member's training set.
template <LabelOracle Oracle>
QbcResult run_qbc(const Dataset& data, const Splits& splits, const Oracle& oracle, const ALConfig& cfg,
                  const Dataset& test, const Network& prototype) {
  cfg.validate(true);
  detail::check_al_inputs(data, splits, test, prototype);
  const std::size_t members = cfg.committee_size;
  if (splits.val_labeled.size() < members * cfg.initial_labeled) {
    throw ArgumentError("disjoint committee seeding needs " + std::to_string(members * cfg.initial_labeled) +
                        " labeled samples, have " + std::to_string(splits.val_labeled.size()));
  }
  if (splits.val_pool.empty()) throw ArgumentError("the unlabeled pool is empty");

  QbcResult result;
  ALState& state = result.state;
  result.member_sets.resize(members);
  for (std::size_t m = 0; m < members; ++m) {
    for (std::size_t k = 0; k < cfg.initial_labeled; ++k) {
      const std::size_t i = splits.val_labeled[m * cfg.initial_labeled + k];
      result.member_sets[m].push_back({i, data.y[i]});
      state.labeled.push_back({i, data.y[i]});
    }
    const std::uint64_t seed = derive_seed(cfg.seed, 1000 + m);
    Network net = prototype;
    net.reinitialize(seed);
    result.committee.members.push_back(std::move(net));
    result.committee.member_seeds.push_back(seed);
  }
  state.pool = splits.val_pool;
  Rng rng = derive_rng(cfg.seed, 0);

  auto record_members = [&](std::size_t round) {
    for (std::size_t m = 0; m < members; ++m) {
      result.member_history.push_back({round, m, result.member_sets[m].size(),
                                       accuracy(predict_labels(result.committee.members[m], test.x), test.y)});
    }
  };
  auto evaluate = [&]() { return accuracy(argmax_rows(qbc_predict_proba(result.committee, test.x)), test.y); };

  for (std::size_t m = 0; m < members; ++m) {
    detail::fit(result.committee.members[m], data, result.member_sets[m], cfg, 0, m + 1);
  }
  state.history.push_back({0, state.labeled.size(), 0, 0, evaluate(),
                           loss_name(loss_schedule_step(0, cfg.loss_schedule))});
  record_members(0);

  while (!state.pool.empty() && state.round < cfg.max_queries) {
    ++state.round;
    RoundRecord record;
    record.round = state.round;

    const RealMatrix pool_x = data.x.select_rows(state.pool);
    QueryScores scores;
    if (cfg.strategy == StrategyKind::random) {
      scores = random_scores(state.pool.size(), rng);
    } else {
      LabelMatrix votes(state.pool.size(), members);
      for (std::size_t m = 0; m < members; ++m) {
        const RealMatrix probs = mean_probabilities(result.committee.members[m], pool_x, cfg.learner_mc_samples, rng);
        for (std::size_t i = 0; i < probs.rows(); ++i) votes(i, m) = argmax(probs.row(i));
      }
      scores = vote_entropy_scores(votes, data.class_count);
    }
    const auto picks = select_top_k(scores, cfg.query_batch);
    const auto added = detail::query_round(state, data, picks, oracle, rng, record);

    for (std::size_t m = 0; m < members; ++m) {
      auto& set = result.member_sets[m];
      set.insert(set.end(), added.begin(), added.end());
      detail::fit(result.committee.members[m], data, set, cfg, state.round, m + 1);
    }
    record.labeled_size = state.labeled.size();
    record.test_accuracy = evaluate();
    record.loss_kind = loss_name(loss_schedule_step(state.round, cfg.loss_schedule));
    state.history.push_back(record);
    record_members(state.round);
    detail::assert_disjoint(state, data.size());
  }
  return result;
}

inline void write_member_history_csv(std::ostream& os, const std::vector<MemberRecord>& history) {
  os << "round,member,training_size,test_accuracy\n";
  for (const auto& r : history) {
    os << r.round << ',' << r.member << ',' << r.training_size << ',' << format_real(r.test_accuracy) << '\n';
  }
}

}  // namespace ual

#endif  // UAL_AL_ENGINE_HPP
