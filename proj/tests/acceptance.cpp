// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fail.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "gradient_check.hpp"
#include "ual/ual.hpp"

#ifndef UAL_CLI_PATH
#error "UAL_CLI_PATH must point at the ual executable"
#endif

using namespace ual;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + std::string("failed: ") + what;
    }
  }
  void note(const std::string& s) {
    if (pass) detail += (detail.empty() ? "" : "; ") + s;
  }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }

// ---------------------------------------------------------------------------

Outcome worked_example() {
  Outcome v;
  const RealMatrix p = RealMatrix::from_rows({{0.3, 0.4, 0.3}, {0.4, 0.45, 0.15}});
  const auto lc = least_confident_scores(p);
  const auto mg = margin_scores(p);
  const auto en = entropy_scores(p);
  v.require(near(lc.scores[0], 0.6, 0.01) && near(lc.scores[1], 0.55, 0.01), "least-confident scores");
  v.require(near(mg.scores[0], 0.1, 0.01) && near(mg.scores[1], 0.05, 0.01), "margin scores");
  v.require(near(en.scores[0], 1.57, 0.01) && near(en.scores[1], 1.46, 0.01), "entropy scores");
  v.require(select_top_k(lc, 1).front() == 0, "least-confident picks the first instance");
  v.require(select_top_k(mg, 1).front() == 1, "margin picks the second instance");
  v.require(select_top_k(en, 1).front() == 0, "entropy picks the first instance");
  v.note("LC " + fmt("%.4f", lc.scores[0]) + "/" + fmt("%.4f", lc.scores[1]) + ", margin " + fmt("%.4f", mg.scores[0]) +
         "/" + fmt("%.4f", mg.scores[1]) + ", entropy " + fmt("%.4f", en.scores[0]) + "/" + fmt("%.4f", en.scores[1]));
  return v;
}

Outcome threshold_arithmetic() {
  Outcome v;
  const double hmax = predictive_entropy(std::vector<double>(5, 0.2));
  const double t5 = threshold_from_fraction(5, 0.55).value_bits;
  const double t2 = threshold_from_fraction(2, 0.5).value_bits;
  v.require(near(hmax, 2.3219, 0.002), "max entropy for 5 classes");
  v.require(near(t5, 1.277, 0.002) && near(t5, 1.276, 0.002), "55% threshold for 5 classes");
  v.require(near(t2, 0.5, 0.002), "binary threshold");
  v.note("Hmax " + fmt("%.4f", hmax) + ", T5 " + fmt("%.4f", t5) + ", T2 " + fmt("%.4f", t2));
  return v;
}

Outcome gradient_checks() {
  Outcome v;
  const auto t0 = std::chrono::steady_clock::now();
  struct Case {
    const char* name;
    LossKind loss;
    std::size_t classes;
  };
  const Case cases[] = {{"cross-entropy", CrossEntropy{}, 3},
                        {"weighted cross-entropy", CrossEntropy{{0.4058, 1.9795, 0.7331, 3.7948, 2.4827}}, 5},
                        {"focal", Focal{4.0, 2.0}, 4}};
  std::uint64_t seed = 31;
  for (const auto& c : cases) {
    const auto s = testing_support::run_gradient_check(c.loss, c.classes, 12, seed++);
    v.require(s.probes >= 100, std::string(c.name) + " probe count");
    v.require(s.max_relative_error < 1e-4, std::string(c.name) + " relative error " + fmt("%.2e", s.max_relative_error));
    v.note(std::string(c.name) + " " + std::to_string(s.probes) + " probes max rel " + fmt("%.1e", s.max_relative_error));
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  v.require(secs < 10.0, "runtime under 10 s");
  v.note(fmt("%.2f s", secs));
  return v;
}

Outcome mc_degeneracy() {
  Outcome v;
  const Network net = make_classifier(8, {16, 12}, 5, Activation::leaky_relu, 0.0, 77);
  RealMatrix x(25, 8);
  Rng data_rng(5);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (double& e : x.data()) e = normal(data_rng);
  Rng rng(1);
  const auto dists = mc_predict_batch(net, x, 50, rng);
  const RealMatrix single = predict_proba(net, x);
  bool identical = true;
  bool same_entropy = true;
  for (std::size_t i = 0; i < dists.size(); ++i) {
    for (std::size_t s = 0; s < 50; ++s) {
      const auto row = dists[i].per_sample_probs.row(s);
      identical = identical && std::equal(row.begin(), row.end(), single.row(i).begin());
    }
    same_entropy = same_entropy && dists[i].entropy_bits == predictive_entropy(single.row(i));
  }
  v.require(identical, "passes bit-identical");
  v.require(same_entropy, "entropy equals single-pass entropy");
  v.note("25 inputs x 50 passes bit-identical");
  return v;
}

Outcome budget_accounting() {
  Outcome v;
  auto run = [](std::size_t classes, std::size_t per_class, ALConfig cfg) {
    const Dataset data = gen_blobs(BlobSpec{classes, 6, std::vector<std::size_t>(classes, per_class), 1.5, 1.0, 4});
    const Splits s = split(data, SplitSpec{0.2, 0.6, 0.2, 100, true, 4});
    cfg.retrain.epochs = 1;
    cfg.retrain.learning_rate = 1e-2;
    const Network learner = make_classifier(6, {8}, classes, Activation::relu, 0.0, 2);
    return run_pool_based(data, s, GroundTruthOracle(classes), cfg, data.subset(s.test), learner).state;
  };
  auto added = [](const ALState& s) { return s.labeled.size() - s.history.front().labeled_size; };

  const ALState binary = run(2, 700, ALConfig::binary_profile());
  v.require(binary.round == 50 && added(binary) == 500, "binary profile adds 500 in 50 rounds");
  const ALState multi = run(5, 500, ALConfig::multiclass_profile());
  v.require(multi.round == 75 && added(multi) == 1200 && multi.total_accepted() == 1200,
            "multi-class profile accepts 1200 in 75 rounds");
  v.note("binary " + std::to_string(added(binary)) + " in " + std::to_string(binary.round) + " rounds, multi-class " +
         std::to_string(multi.total_accepted()) + " in " + std::to_string(multi.round) + " rounds");
  return v;
}

// 5-class blobs, d = 16, pool of 2000. Entropy vs random sampling with a
// perfect oracle so only the selection rule differs.
Outcome al_advantage() {
  Outcome v;
  const auto t0 = std::chrono::steady_clock::now();
  constexpr std::size_t kSeeds = 10;
  constexpr std::size_t kInitial = 20;
  constexpr std::size_t kBatch = 20;
  constexpr std::size_t kLabelCap = 1000;  // half the pool
  std::size_t wins = 0;
  std::vector<double> labels_needed;
  std::size_t pool_size = 0;
  for (std::uint64_t seed = 1; seed <= kSeeds; ++seed) {
    // 808 per class: validation takes 404 of each, 4 of which seed the labeled set.
    const Dataset data = gen_blobs(BlobSpec{5, 16, std::vector<std::size_t>(5, 808), 0.5, 1.0, seed});
    const Splits s = split(data, SplitSpec{0.25, 0.5, 0.25, kInitial, true, seed});
    pool_size = s.val_pool.size();
    const Dataset test = data.subset(s.test);
    const Network learner = make_classifier(16, {32}, 5, Activation::relu, 0.0, seed * 7);

    ALConfig cfg;
    cfg.initial_labeled = kInitial;
    cfg.query_batch = kBatch;
    cfg.max_queries = (kLabelCap - kInitial) / kBatch;
    cfg.retrain.epochs = 20;
    cfg.retrain.batch_size = 32;
    cfg.retrain.learning_rate = 1e-2;
    cfg.seed = seed;
    cfg.strategy = StrategyKind::entropy;
    const auto ent = run_pool_based(data, s, GroundTruthOracle(5), cfg, test, learner);
    cfg.strategy = StrategyKind::random;
    const auto rnd = run_pool_based(data, s, GroundTruthOracle(5), cfg, test, learner);

    std::vector<std::size_t> everything = s.val_labeled;
    everything.insert(everything.end(), s.val_pool.begin(), s.val_pool.end());
    const Dataset full = data.subset(everything);
    Network full_net = learner;
    TrainConfig tc = cfg.retrain;
    tc.epochs = 60;
    tc.seed = seed;
    train(full_net, full.x, full.y, tc, CrossEntropy{});
    const double full_acc = accuracy(predict_labels(full_net, test.x), test.y);

    const double a_ent = area_under_learning_curve(ent.state.history);
    const double a_rnd = area_under_learning_curve(rnd.state.history);
    wins += a_ent >= a_rnd ? 1 : 0;
    double needed = INFINITY;
    for (const auto& r : ent.state.history) {
      if (r.test_accuracy >= 0.9 * full_acc) {
        needed = static_cast<double>(r.labeled_size);
        break;
      }
    }
    labels_needed.push_back(needed);
    std::printf("  seed %2llu  full %.3f  area entropy %.4f random %.4f  90%% at %s labels\n",
                static_cast<unsigned long long>(seed), full_acc, a_ent, a_rnd,
                std::isfinite(needed) ? std::to_string(static_cast<std::size_t>(needed)).c_str() : "never");
  }
  std::sort(labels_needed.begin(), labels_needed.end());
  const double median = (labels_needed[kSeeds / 2 - 1] + labels_needed[kSeeds / 2]) / 2.0;
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  v.require(pool_size == 2000, "pool of 2000");
  v.require(wins >= 8, "entropy area >= random area in 8 of 10 seeds");
  v.require(median <= 0.5 * static_cast<double>(pool_size), "median labels to 90% of full-pool accuracy <= 50% of pool");
  v.require(secs < 300.0, "runtime under 5 min");
  v.note(std::to_string(wins) + "/10 seeds, median " + fmt("%.0f", median) + " labels (cap " +
         std::to_string(pool_size / 2) + "), " + fmt("%.1f s", secs));
  return v;
}

Outcome qbc_correctness() {
  Outcome v;
  const LabelMatrix agree = LabelMatrix::from_rows({{1, 1, 1}, {0, 0, 0}, {4, 4, 4}});
  const auto z = vote_entropy_scores(agree, 5).scores;
  v.require(std::all_of(z.begin(), z.end(), [](double e) { return e == 0.0; }), "full agreement gives zero vote entropy");

  const LabelMatrix votes = LabelMatrix::from_rows({{0, 0, 1}, {2, 2, 2}, {0, 1, 2}, {1, 1, 0}});
  const auto ve = vote_entropy_scores(votes, 3);
  v.require(select_top_k(ve, 1).front() == 2, "maximal split selected first");

  Committee c;
  for (const auto& p : std::vector<std::vector<double>>{{0.6, 0.4}, {0.7, 0.3}, {0.4, 0.6}}) {
    Network net({{1, 2, Activation::softmax}}, 1);
    net.parameters().weights[0].fill(0.0);
    for (std::size_t k = 0; k < 2; ++k) net.parameters().biases[0](0, k) = std::log(p[k]);
    c.members.push_back(std::move(net));
  }
  const auto [label, probs] = qbc_predict(c, std::vector<double>{0.0});
  v.require(near(probs[0], 0.5667, 1e-4) && near(probs[1], 0.4333, 1e-4) && label == 0, "hand-averaged committee");
  v.note("qbc_predict [" + fmt("%.4f", probs[0]) + ", " + fmt("%.4f", probs[1]) + "] -> " + std::to_string(label));
  return v;
}

Outcome uq_structure() {
  Outcome v;
  const Dataset data = gen_blobs(BlobSpec{5, 8, std::vector<std::size_t>(5, 200), 0.8, 1.0, 12});
  const Splits s = split(data, SplitSpec{0.6, 0.2, 0.2, 0, true, 12});
  const Dataset train_set = data.subset(s.train);
  const Dataset test = data.subset(s.test);
  Network net = make_classifier(8, {32}, 5, Activation::leaky_relu, 0.25, 3);
  TrainConfig tc;
  tc.epochs = 30;
  tc.batch_size = 32;
  tc.learning_rate = 1e-2;
  train(net, train_set.x, train_set.y, tc, CrossEntropy{class_weights(train_set)});
  const std::vector<std::size_t> settings{5, 20, 50};

  Rng rng(8);
  const Annotator annotator(net, threshold_from_fraction(5, 0.55), 20);
  const UQReport rep = uq_report(annotator, test.x, test.y, settings, rng);
  std::string cells;
  for (const auto& r : rep) {
    v.require(r.total() == test.size(), "MC-" + std::to_string(r.mc_samples) + " cells sum to test size");
    cells += " MC-" + std::to_string(r.mc_samples) + " " + std::to_string(r.correct_lt_t) + "/" +
             std::to_string(r.correct_ge_t) + "/" + std::to_string(r.wrong_lt_t) + "/" + std::to_string(r.wrong_ge_t);
  }

  Network uniform = net;
  uniform.parameters().weights.back().fill(0.0);
  uniform.parameters().biases.back().fill(0.0);
  const Annotator flat(uniform, threshold_from_fraction(5, 0.55), 20);
  for (const auto& r : uq_report(flat, test.x, test.y, settings, rng)) {
    v.require(r.correct_lt_t + r.wrong_lt_t == 0 && r.correct_ge_t + r.wrong_ge_t == test.size(),
              "uniform outputs all land in u >= T");
  }

  const std::vector<std::size_t>& truth = test.y;
  const Annotator loose(net, threshold_from_fraction(5, 0.55), 20, false);
  const Annotator strict(net, threshold_from_fraction(5, 0.55), 20, true);
  Rng r1(21), r2(21);
  const auto unchecked = loose.annotate_batch(test.x, std::span<const std::size_t>(truth), r1);
  const auto checked = strict.annotate_batch(test.x, std::span<const std::size_t>(truth), r2);
  std::size_t wrong_unchecked = 0;
  std::size_t wrong_checked = 0;
  for (const auto& a : unchecked) wrong_unchecked += a.accepted && a.annotation.label != truth[a.index];
  for (const auto& a : checked) wrong_checked += a.accepted && a.annotation.label != truth[a.index];
  v.require(wrong_checked == 0, "verify mode admits no mislabeled samples");
  v.note("correct<T/correct>=T/wrong<T/wrong>=T" + cells + "; confident-wrong " + std::to_string(wrong_unchecked) +
         " without verify, " + std::to_string(wrong_checked) + " with");
  return v;
}

Outcome class_weight_check() {
  Outcome v;
  const std::vector<std::size_t> counts{1805, 370, 999, 193, 295};
  const std::vector<double> expected{0.4058, 1.9795, 0.7331, 3.7948, 2.4827};
  const auto w = class_weights(counts);
  double weighted = 0.0;
  std::string got;
  for (std::size_t c = 0; c < counts.size(); ++c) {
    v.require(near(w[c], expected[c], 0.001), "weight for class " + std::to_string(c));
    weighted += static_cast<double>(counts[c]) * w[c];
    got += (c ? " " : "") + fmt("%.4f", w[c]);
  }
  v.require(weighted == 3662.0, "sum of count * weight equals N");
  v.note("[" + got + "], sum " + fmt("%.17g", weighted));
  return v;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string("\"") + UAL_CLI_PATH + "\" " + args + " >>\"" + log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome cli_determinism() {
  Outcome v;
  const fs::path root = fs::temp_directory_path() / "ual_acceptance_determinism";
  fs::remove_all(root);
  fs::create_directories(root);
  {
    std::ofstream os(root / "exp.json");
    os << R"({
  "seed": 11,
  "data": {"path": "pool.csv"},
  "split": {"train": 0.4, "val": 0.5, "test": 0.1, "val_labeled": 60},
  "annotator": {"hidden": [32], "dropout": 0.2, "mc_samples": 10,
                "train": {"epochs": 15, "batch_size": 32, "learning_rate": 0.005}},
  "learner": {"hidden": [16]},
  "al": {"strategy": "entropy", "initial_labeled": 20, "query_batch": 10, "max_queries": 8,
         "loss_schedule": "cross_entropy_then_focal",
         "retrain": {"epochs": 4, "batch_size": 32, "learning_rate": 0.005}},
  "uq": {"mc_settings": [5, 20]}
})";
  }
  const fs::path log = root / "log.txt";
  std::vector<fs::path> runs;
  for (int k = 0; k < 2; ++k) {
    const fs::path out = root / ("run" + std::to_string(k));
    fs::create_directories(out);
    const std::string cfg = " --config " + (root / "exp.json").string() + " --seed 11 --out-dir " + out.string();
    bool ok = run_cli("gen-data --classes 4 --dim 6 --per-class 150 --seed 5 --spread 1.2 --out " +
                      (root / "pool.csv").string(), log) == 0;
    if (ok) {
      fs::copy_file(root / "pool.csv", out / "pool.csv", fs::copy_options::overwrite_existing);
      ok = run_cli("train-annotator" + cfg, log) == 0 && run_cli("run-al" + cfg, log) == 0 &&
           run_cli("evaluate" + cfg, log) == 0 && run_cli("uq-report" + cfg, log) == 0;
    }
    if (ok) {
      const fs::path qbc = out / "qbc";
      fs::create_directories(qbc);
      fs::copy_file(out / "annotator.ualnet", qbc / "annotator.ualnet");
      ok = run_cli("run-al --config " + (root / "exp.json").string() +
                       " --seed 11 --strategy vote_entropy --out-dir " + qbc.string(),
                   log) == 0;
    }
    v.require(ok, "CLI run " + std::to_string(k) + " (see " + log.string() + ")");
    runs.push_back(out);
  }
  if (!v.pass) return v;
  std::size_t compared = 0;
  for (const auto& entry : fs::recursive_directory_iterator(runs[0])) {
    if (!entry.is_regular_file()) continue;
    const fs::path rel = fs::relative(entry.path(), runs[0]);
    const fs::path other = runs[1] / rel;
    v.require(fs::exists(other) && slurp(entry.path()) == slurp(other), rel.string() + " identical");
    ++compared;
  }
  std::size_t second = 0;
  for (const auto& entry : fs::recursive_directory_iterator(runs[1])) second += entry.is_regular_file() ? 1 : 0;
  v.require(compared == second && compared >= 15, "same file set in both runs");
  v.note(std::to_string(compared) + " files byte-identical across two runs");
  return v;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> check;
  };
  const Criterion criteria[] = {
      {1, "worked-example fidelity", worked_example},
      {2, "threshold arithmetic", threshold_arithmetic},
      {3, "gradient checks", gradient_checks},
      {4, "MC-dropout degeneracy", mc_degeneracy},
      {5, "budget accounting", budget_accounting},
      {6, "AL advantage over random", al_advantage},
      {7, "QBC correctness", qbc_correctness},
      {8, "UQ report structure", uq_structure},
      {9, "class weights", class_weight_check},
      {10, "CLI determinism", cli_determinism},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    Outcome v;
    try {
      v = c.check();
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail = std::string("exception: ") + e.what();
    }
    failures += v.pass ? 0 : 1;
    std::printf("%s %d %s: %s\n", v.pass ? "PASS" : "FAIL", c.id, c.name, v.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(std::size(criteria)) - failures, std::size(criteria));
  return failures == 0 ? 0 : 1;
}
