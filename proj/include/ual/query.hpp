#ifndef UAL_QUERY_HPP
#define UAL_QUERY_HPP

// Pool scoring for uncertainty sampling and query-by-committee.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ual/error.hpp"
#include "ual/matrix.hpp"
#include "ual/mc_dropout.hpp"
#include "ual/random.hpp"

namespace ual {

/// random is a baseline for comparison; it is not an uncertainty measure.
enum class StrategyKind { least_confident, margin, entropy, vote_entropy, random };

inline std::string_view to_string(StrategyKind s) {
  switch (s) {
    case StrategyKind::least_confident: return "least_confident";
    case StrategyKind::margin: return "margin";
    case StrategyKind::entropy: return "entropy";
    case StrategyKind::vote_entropy: return "vote_entropy";
    case StrategyKind::random: return "random";
  }
  return "unknown";
}

inline StrategyKind parse_strategy(std::string_view name) {
  for (auto s : {StrategyKind::least_confident, StrategyKind::margin, StrategyKind::entropy,
                 StrategyKind::vote_entropy, StrategyKind::random}) {
    if (to_string(s) == name) return s;
  }
  throw ArgumentError("unknown strategy '" + std::string(name) + "'");
}

enum class Direction { maximize, minimize };

struct QueryScores {
  std::vector<double> scores;
  Direction direction = Direction::maximize;
};

/// 1 - max_c p(c | x).
inline QueryScores least_confident_scores(const RealMatrix& probs) {
  require_probability_rows(probs);
  QueryScores q{std::vector<double>(probs.rows()), Direction::maximize};
  for (std::size_t i = 0; i < probs.rows(); ++i) {
    const auto r = probs.row(i);
    q.scores[i] = 1.0 - *std::max_element(r.begin(), r.end());
  }
  return q;
}

/// Gap between the two most probable classes; smaller is more uncertain.
inline QueryScores margin_scores(const RealMatrix& probs) {
  if (probs.cols() < 2) throw ArgumentError("margin needs at least 2 classes");
  require_probability_rows(probs);
  QueryScores q{std::vector<double>(probs.rows()), Direction::minimize};
  for (std::size_t i = 0; i < probs.rows(); ++i) {
    double first = -1.0;
    double second = -1.0;
    for (double p : probs.row(i)) {
      if (p > first) {
        second = first;
        first = p;
      } else if (p > second) {
        second = p;
      }
    }
    q.scores[i] = first - second;
  }
  return q;
}

inline QueryScores entropy_scores(const RealMatrix& probs) {
  require_probability_rows(probs);
  QueryScores q{std::vector<double>(probs.rows()), Direction::maximize};
  for (std::size_t i = 0; i < probs.rows(); ++i) q.scores[i] = predictive_entropy(probs.row(i));
  return q;
}

/// Entropy (bits) of the committee's hard-vote histogram; one row per pool
/// sample, one column per member.
inline QueryScores vote_entropy_scores(const LabelMatrix& votes, std::size_t class_count) {
  const std::size_t members = votes.cols();
  if (members < 2) throw ArgumentError("vote entropy needs a committee of at least 2 members");
  if (class_count < 1) throw ArgumentError("class_count must be >= 1");
  QueryScores q{std::vector<double>(votes.rows()), Direction::maximize};
  std::vector<std::size_t> tally(class_count);
  for (std::size_t i = 0; i < votes.rows(); ++i) {
    std::fill(tally.begin(), tally.end(), std::size_t{0});
    for (std::size_t v : votes.row(i)) {
      if (v >= class_count) throw ArgumentError("vote " + std::to_string(v) + " out of range");
      ++tally[v];
    }
    double h = 0.0;
    for (std::size_t t : tally) {
      if (t == 0) continue;
      const double share = static_cast<double>(t) / static_cast<double>(members);
      h -= share * std::log2(share);
    }
    q.scores[i] = h;
  }
  return q;
}

/// Uniform scores for the random-selection baseline.
inline QueryScores random_scores(std::size_t n, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  QueryScores q{std::vector<double>(n), Direction::maximize};
  for (double& s : q.scores) s = u(rng);
  return q;
}

/// The min(k, N) best indices, best first, lowest index wins ties.
inline std::vector<std::size_t> select_top_k(const QueryScores& q, std::size_t k) {
  if (k < 1) throw ArgumentError("k must be >= 1");
  if (q.scores.empty()) throw ArgumentError("no scores to select from");
  if (!all_finite(q.scores)) throw NumericError("query scores must be finite");
  std::vector<std::size_t> order(q.scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto better = [&](std::size_t a, std::size_t b) {
    const double sa = q.scores[a];
    const double sb = q.scores[b];
    if (sa != sb) return q.direction == Direction::maximize ? sa > sb : sa < sb;
    return a < b;
  };
  const std::size_t take = std::min(k, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take), order.end(), better);
  order.resize(take);
  return order;
}

/// Scores for the probability-based strategies.
inline QueryScores score_probabilities(StrategyKind strategy, const RealMatrix& probs, Rng& rng) {
  switch (strategy) {
    case StrategyKind::least_confident: return least_confident_scores(probs);
    case StrategyKind::margin: return margin_scores(probs);
    case StrategyKind::entropy: return entropy_scores(probs);
    case StrategyKind::random: return random_scores(probs.rows(), rng);
    case StrategyKind::vote_entropy: break;
  }
  throw ArgumentError("vote_entropy scores committee votes, not probabilities");
}

}  // namespace ual

#endif  // UAL_QUERY_HPP
