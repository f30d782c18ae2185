// ual: experiment runner for uncertainty-gated active learning.
//
//   ual gen-data --classes 5 --dim 16 --per-class 200 --seed 7 --out pool.csv
//   ual train-annotator --config exp.json
//   ual run-al --config exp.json [--strategy entropy] [--verify-labels]
//   ual evaluate --config exp.json
//   ual uq-report --config exp.json [--mc-samples 20]

#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "ual/experiment.hpp"

namespace {

constexpr int kUsageError = 2;

struct ConfigFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<std::string> strategy;
  std::optional<std::size_t> mc_samples;
  std::optional<double> threshold_fraction;
  std::optional<double> dropout;
  bool verify_labels = false;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--seed", seed, "global seed");
    cmd->add_option("--out-dir", out_dir, "output directory");
    cmd->add_option("--strategy", strategy, "least_confident | margin | entropy | vote_entropy | random")
        ->check(CLI::IsMember({"least_confident", "margin", "entropy", "vote_entropy", "random"}));
    cmd->add_option("--mc-samples", mc_samples, "MC-dropout passes")->check(CLI::PositiveNumber);
    cmd->add_option("--threshold-fraction", threshold_fraction, "T as a fraction of log2(C)")
        ->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--dropout", dropout, "annotator dropout rate")->check(CLI::Range(0.0, 0.999999));
    cmd->add_flag("--verify-labels", verify_labels, "accept only labels matching ground truth");
  }

  ual::ExperimentConfig load() const {
    ual::ExperimentConfig c = ual::load_config(config);
    ual::apply(c, ual::Overrides{seed, out_dir, strategy, mc_samples, threshold_fraction, dropout, verify_labels});
    ual::validate(c);
    return c;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Uncertainty-gated active learning experiments"};
  app.require_subcommand(1);

  std::size_t classes = 0;
  std::size_t dim = 0;
  std::vector<std::size_t> per_class;
  std::uint64_t data_seed = 0;
  double spread = 1.0;
  double noise = 1.0;
  std::string out_file;
  auto* gen = app.add_subcommand("gen-data", "write a synthetic Gaussian-blob feature CSV");
  gen->add_option("--classes", classes, "class count")->required()->check(CLI::PositiveNumber);
  gen->add_option("--dim", dim, "feature dimension")->required()->check(CLI::PositiveNumber);
  gen->add_option("--per-class", per_class, "samples per class (one value, or one per class)")
      ->required()
      ->delimiter(',')
      ->check(CLI::PositiveNumber);
  gen->add_option("--seed", data_seed, "generator seed");
  gen->add_option("--spread", spread, "std of class centers")->check(CLI::PositiveNumber);
  gen->add_option("--std", noise, "within-class std")->check(CLI::NonNegativeNumber);
  gen->add_option("--out", out_file, "output CSV")->required();

  ConfigFlags train_flags, al_flags, eval_flags, uq_flags;
  auto* train = app.add_subcommand("train-annotator", "train the MC-dropout annotator");
  train_flags.attach(train);
  auto* run_al = app.add_subcommand("run-al", "run pool-based or query-by-committee active learning");
  al_flags.attach(run_al);
  auto* evaluate = app.add_subcommand("evaluate", "classification report for the annotator");
  eval_flags.attach(evaluate);
  auto* uq = app.add_subcommand("uq-report", "uncertainty breakdown per MC setting");
  uq_flags.attach(uq);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  }

  try {
    if (*gen) {
      ual::BlobSpec spec;
      spec.class_count = classes;
      spec.dim = dim;
      if (per_class.size() == 1) {
        spec.per_class_counts.assign(classes, per_class.front());
      } else if (per_class.size() == classes) {
        spec.per_class_counts = per_class;
      } else {
        std::cerr << "--per-class needs 1 or " << classes << " values\n";
        return kUsageError;
      }
      spec.class_center_spread = spread;
      spec.within_class_std = noise;
      spec.seed = data_seed;
      ual::cmd_gen_data(spec, out_file, std::cout);
    } else if (*train) {
      ual::cmd_train_annotator(train_flags.load(), std::cout);
    } else if (*run_al) {
      ual::cmd_run_al(al_flags.load(), std::cout);
    } else if (*evaluate) {
      ual::cmd_evaluate(eval_flags.load(), std::cout);
    } else if (*uq) {
      ual::ExperimentConfig c = uq_flags.load();
      if (uq_flags.mc_samples) c.uq_mc_settings = {*uq_flags.mc_samples};
      ual::cmd_uq_report(c, std::cout);
    }
  } catch (const ual::ArgumentError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
