// Command-line surface: drift analysis on feature dumps, bound evaluation,
// synthetic training and lambda sweeps, and the randomized verification
// suites. Exit codes: 0 success, 1 computation/validation failure, 2 usage.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mftb/bounds.hpp"
#include "mftb/drift.hpp"
#include "mftb/errors.hpp"
#include "mftb/feature_io.hpp"
#include "mftb/run_config.hpp"
#include "mftb/trainer.hpp"
#include "mftb/verify.hpp"

namespace {

std::string fmt6(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.6f", value);
  return buffer;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw mftb::IoFailure("cannot open " + path + " for writing");
  }
  out << text;
  if (!out) {
    throw mftb::IoFailure("write failed for " + path);
  }
}

std::vector<int> load_labels(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw mftb::IoFailure("cannot open labels file " + path);
  }
  std::vector<int> labels;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line.empty()) {
      continue;
    }
    try {
      labels.push_back(std::stoi(line));
    } catch (const std::exception&) {
      throw mftb::MalformedHeader("labels file: bad line \"" + line + "\"");
    }
  }
  return labels;
}

// --- drift ---

struct DriftArgs {
  std::string pretrained;
  std::string tuned;
  long rank = mftb::drift::kDefaultRank;
  std::vector<long> ranks;
  long per_class_cap = 0;
  std::string labels_path;
  std::string out_path;
  std::string format = "bin";
  std::string config_path;
};

mftb::drift::FeatureMatrix load_features(const std::string& path,
                                         const std::string& format) {
  if (format == "csv") {
    return mftb::io::load_feature_matrix_csv(path);
  }
  return mftb::io::load_feature_matrix(path);
}

int run_drift(const DriftArgs& args) {
  mftb::drift::FeatureMatrix pretrained =
      load_features(args.pretrained, args.format);
  mftb::drift::FeatureMatrix tuned = load_features(args.tuned, args.format);
  pretrained.validate();
  tuned.validate();

  if (args.per_class_cap > 0) {
    std::vector<int> labels = load_labels(args.labels_path);
    if (static_cast<Eigen::Index>(labels.size()) != pretrained.count()) {
      throw mftb::ShapeMismatch("labels file holds " +
                                std::to_string(labels.size()) +
                                " entries for " +
                                std::to_string(pretrained.count()) + " rows");
    }
    std::map<int, long> kept_per_class;
    std::vector<Eigen::Index> kept;
    for (Eigen::Index i = 0; i < pretrained.count(); ++i) {
      long& count = kept_per_class[labels[static_cast<std::size_t>(i)]];
      if (count < args.per_class_cap) {
        kept.push_back(i);
        ++count;
      }
    }
    Eigen::MatrixXd z(static_cast<Eigen::Index>(kept.size()),
                      pretrained.dim());
    Eigen::MatrixXd h(static_cast<Eigen::Index>(kept.size()), tuned.dim());
    for (std::size_t k = 0; k < kept.size(); ++k) {
      z.row(static_cast<Eigen::Index>(k)) = pretrained.rows.row(kept[k]);
      h.row(static_cast<Eigen::Index>(k)) = tuned.rows.row(kept[k]);
    }
    pretrained.rows = std::move(z);
    tuned.rows = std::move(h);
  }

  std::vector<Eigen::Index> ranks;
  if (args.ranks.empty()) {
    ranks.push_back(args.rank);
  } else {
    for (long r : args.ranks) {
      ranks.push_back(r);
    }
  }
  std::vector<mftb::drift::DriftReport> reports =
      mftb::drift::drift_sensitivity(pretrained, tuned, ranks);

  if (!args.out_path.empty()) {
    std::string csv = "rank,ratio_pretrained,ratio_tuned,delta,n_samples\n";
    for (const auto& report : reports) {
      csv += std::to_string(report.rank) + "," +
             fmt6(report.ratio_pretrained) + "," + fmt6(report.ratio_tuned) +
             "," + fmt6(report.delta) + "," +
             std::to_string(report.n_samples) + "\n";
    }
    write_text_file(args.out_path, csv);
  }

  // The default-rank delta goes to stdout; refit when the sweep skipped it.
  double default_delta = 0.0;
  bool found = false;
  for (const auto& report : reports) {
    if (report.rank == args.rank) {
      default_delta = report.delta;
      found = true;
      break;
    }
  }
  if (!found) {
    default_delta =
        mftb::drift::manifold_drift(pretrained, tuned, args.rank).delta;
  }
  std::cout << fmt6(default_delta) << "\n";
  return 0;
}

// --- train / compare ---

struct TrainArgs {
  mftb::trainer::TaskSpec task;
  mftb::trainer::TrainerConfig config;
  std::uint64_t task_seed = 0;
  std::vector<double> lambdas;
  std::vector<std::uint64_t> seeds;
  std::string out_path;
  std::string config_path;
};

const std::set<std::string>& trainer_config_keys() {
  static const std::set<std::string> keys = {
      "lambda",         "tau",
      "learning_rate",  "epochs",
      "seed",           "d_pca_report",
      "init_std",       "classes",
      "dim",            "transferable_rank",
      "shortcut_rank",  "train_per_class",
      "test_per_class", "shortcut_strength",
      "noise_std",      "task_seed"};
  return keys;
}

// Command line wins over the config file, which wins over defaults.
void apply_trainer_config(const mftb::io::RunConfig& file, CLI::App* cmd,
                          TrainArgs* args) {
  auto not_given = [&](const char* flag) { return cmd->count(flag) == 0; };
  if (file.has("lambda") && not_given("--lambda"))
    args->config.lambda = file.get_double("lambda");
  if (file.has("tau") && not_given("--tau"))
    args->config.tau = file.get_double("tau");
  if (file.has("learning_rate") && not_given("--lr"))
    args->config.learning_rate = file.get_double("learning_rate");
  if (file.has("epochs") && not_given("--epochs"))
    args->config.epochs = static_cast<int>(file.get_long("epochs"));
  if (file.has("seed") && not_given("--seed"))
    args->config.seed = file.get_u64("seed");
  if (file.has("d_pca_report") && not_given("--d-pca"))
    args->config.d_pca_report = file.get_long("d_pca_report");
  if (file.has("init_std") && not_given("--init-std"))
    args->config.init_std = file.get_double("init_std");
  if (file.has("classes") && not_given("--classes"))
    args->task.num_classes = static_cast<int>(file.get_long("classes"));
  if (file.has("dim") && not_given("--dim"))
    args->task.dim = static_cast<int>(file.get_long("dim"));
  if (file.has("transferable_rank") && not_given("--transferable-rank"))
    args->task.transferable_rank =
        static_cast<int>(file.get_long("transferable_rank"));
  if (file.has("shortcut_rank") && not_given("--shortcut-rank"))
    args->task.shortcut_rank =
        static_cast<int>(file.get_long("shortcut_rank"));
  if (file.has("train_per_class") && not_given("--train-per-class"))
    args->task.train_per_class =
        static_cast<int>(file.get_long("train_per_class"));
  if (file.has("test_per_class") && not_given("--test-per-class"))
    args->task.test_per_class =
        static_cast<int>(file.get_long("test_per_class"));
  if (file.has("shortcut_strength") && not_given("--shortcut-strength"))
    args->task.shortcut_strength = file.get_double("shortcut_strength");
  if (file.has("noise_std") && not_given("--noise-std"))
    args->task.noise_std = file.get_double("noise_std");
  if (file.has("task_seed") && not_given("--task-seed"))
    args->task_seed = file.get_u64("task_seed");
}

void add_task_and_config_flags(CLI::App* cmd, TrainArgs* args) {
  cmd->add_option("--lambda", args->config.lambda,
                  "consistency weight (default 12)");
  cmd->add_option("--tau", args->config.tau, "softmax temperature");
  cmd->add_option("--lr", args->config.learning_rate, "learning rate");
  cmd->add_option("--epochs", args->config.epochs, "training epochs");
  cmd->add_option("--seed", args->config.seed, "run seed");
  cmd->add_option("--d-pca", args->config.d_pca_report,
                  "subspace rank for the drift report");
  cmd->add_option("--init-std", args->config.init_std,
                  "parameter init standard deviation");
  cmd->add_option("--classes", args->task.num_classes, "number of classes");
  cmd->add_option("--dim", args->task.dim, "feature dimension");
  cmd->add_option("--transferable-rank", args->task.transferable_rank,
                  "rank of the transferable subspace");
  cmd->add_option("--shortcut-rank", args->task.shortcut_rank,
                  "rank of the shortcut subspace");
  cmd->add_option("--train-per-class", args->task.train_per_class,
                  "train samples per class");
  cmd->add_option("--test-per-class", args->task.test_per_class,
                  "held-out samples per class");
  cmd->add_option("--shortcut-strength", args->task.shortcut_strength,
                  "train-split shortcut coefficient in [0, 1)");
  cmd->add_option("--noise-std", args->task.noise_std,
                  "isotropic feature noise");
  cmd->add_option("--task-seed", args->task_seed,
                  "seed of the synthetic task (default: run seed)");
  cmd->add_option("--config", args->config_path,
                  "key=value configuration file");
  cmd->add_option("--out", args->out_path, "CSV output path");
}

std::string summary_row(const mftb::trainer::LambdaRow& row) {
  return fmt6(row.lambda) + "," + fmt6(row.delta) + "," +
         fmt6(row.mean_alignment) + "," + fmt6(row.test_accuracy);
}

int run_train(CLI::App* cmd, TrainArgs* args) {
  if (!args->config_path.empty()) {
    apply_trainer_config(mftb::io::RunConfig::parse_file(
                             args->config_path, trainer_config_keys()),
                         cmd, args);
  }
  if (cmd->count("--task-seed") == 0 && args->task_seed == 0) {
    args->task_seed = args->config.seed;
  }
  mftb::trainer::SyntheticTask task =
      mftb::trainer::generate_task(args->task, args->task_seed);
  mftb::trainer::TrainingReport report =
      mftb::trainer::train(task, args->config);

  if (!args->out_path.empty()) {
    std::string csv = "epoch,ce,img,txt,con,total\n";
    for (std::size_t e = 0; e < report.series.size(); ++e) {
      const auto& loss = report.series[e];
      csv += std::to_string(e + 1) + "," + fmt6(loss.ce) + "," +
             fmt6(loss.img) + "," + fmt6(loss.txt) + "," + fmt6(loss.con) +
             "," + fmt6(loss.total) + "\n";
    }
    write_text_file(args->out_path, csv);
  }

  mftb::trainer::LambdaRow row{args->config.lambda, report.drift.delta,
                               report.mean_alignment, report.test_accuracy};
  std::cout << "lambda,delta,mean_alignment,test_accuracy\n"
            << summary_row(row) << "\n";
  return 0;
}

int run_compare(CLI::App* cmd, TrainArgs* args) {
  if (!args->config_path.empty()) {
    apply_trainer_config(mftb::io::RunConfig::parse_file(
                             args->config_path, trainer_config_keys()),
                         cmd, args);
  }
  if (args->lambdas.empty()) {
    args->lambdas = {0.0, 12.0};
  }
  std::vector<std::uint64_t> seeds = args->seeds;
  bool multi_seed = seeds.size() > 1;
  if (seeds.empty()) {
    seeds.push_back(args->config.seed);
  }

  std::string csv = multi_seed
                        ? "seed,lambda,delta,mean_alignment,test_accuracy\n"
                        : "lambda,delta,mean_alignment,test_accuracy\n";
  for (std::uint64_t seed : seeds) {
    mftb::trainer::TrainerConfig config = args->config;
    config.seed = seed;
    std::uint64_t task_seed =
        cmd->count("--task-seed") > 0 || args->task_seed != 0
            ? args->task_seed
            : seed;
    mftb::trainer::SyntheticTask task =
        mftb::trainer::generate_task(args->task, task_seed);
    std::vector<mftb::trainer::LambdaRow> rows =
        mftb::trainer::compare_lambda(task, config, args->lambdas);
    for (const auto& row : rows) {
      if (multi_seed) {
        csv += std::to_string(seed) + ",";
      }
      csv += summary_row(row) + "\n";
    }
  }
  if (!args->out_path.empty()) {
    write_text_file(args->out_path, csv);
  }
  std::cout << csv;
  return 0;
}

// --- bound ---

struct BoundArgs {
  mftb::bounds::BoundParams params;
  double empirical_risk = 0.0;
  double l_con = 0.5;
  std::string mode = "fixed";
  std::string config_path;
};

const std::set<std::string>& bound_config_keys() {
  static const std::set<std::string> keys = {
      "tau",        "classes",      "samples",        "prompt_dim",
      "param_radius", "lipschitz",  "confidence",     "epsilon",
      "empirical_risk", "l_con",    "mode"};
  return keys;
}

void apply_bound_config(const mftb::io::RunConfig& file, CLI::App* cmd,
                        BoundArgs* args) {
  auto not_given = [&](const char* flag) { return cmd->count(flag) == 0; };
  if (file.has("tau") && not_given("--tau"))
    args->params.tau = file.get_double("tau");
  if (file.has("classes") && not_given("--classes"))
    args->params.num_classes = file.get_long("classes");
  if (file.has("samples") && not_given("--samples"))
    args->params.num_samples = file.get_long("samples");
  if (file.has("prompt_dim") && not_given("--prompt-dim"))
    args->params.prompt_dim = file.get_long("prompt_dim");
  if (file.has("param_radius") && not_given("--param-radius"))
    args->params.param_radius = file.get_double("param_radius");
  if (file.has("lipschitz") && not_given("--lipschitz"))
    args->params.lipschitz = file.get_double("lipschitz");
  if (file.has("confidence") && not_given("--confidence"))
    args->params.confidence = file.get_double("confidence");
  if (file.has("epsilon") && not_given("--epsilon"))
    args->params.epsilon = file.get_double("epsilon");
  if (file.has("empirical_risk") && not_given("--empirical-risk"))
    args->empirical_risk = file.get_double("empirical_risk");
  if (file.has("l_con") && not_given("--l-con"))
    args->l_con = file.get_double("l_con");
  if (file.has("mode") && not_given("--mode"))
    args->mode = file.get_string("mode");
}

int run_bound(CLI::App* cmd, BoundArgs* args) {
  if (!args->config_path.empty()) {
    apply_bound_config(mftb::io::RunConfig::parse_file(args->config_path,
                                                       bound_config_keys()),
                       cmd, args);
  }
  mftb::bounds::BoundTerms terms;
  if (args->mode == "peeling") {
    terms = mftb::bounds::peeling_terms(args->empirical_risk, args->l_con,
                                        args->params);
    std::cout << "H=" << terms.peeling_depth << "\n";
    std::cout << "B=" << fmt6(terms.loss_bound)
              << ", rademacher=" << fmt6(terms.complexity)
              << ", deviation=" << fmt6(terms.deviation)
              << ", bound=" << fmt6(terms.value) << "\n";
  } else {
    terms = mftb::bounds::generalization_terms(args->empirical_risk,
                                               args->params);
    // The reported rademacher value is the complexity bound itself; the
    // final bound adds twice that plus the deviation term.
    std::cout << "B=" << fmt6(terms.loss_bound)
              << ", rademacher=" << fmt6(terms.complexity / 2.0)
              << ", deviation=" << fmt6(terms.deviation)
              << ", bound=" << fmt6(terms.value) << "\n";
  }
  return 0;
}

// --- verify ---

struct VerifyArgs {
  std::string suite = "all";
  long long trials = 10000;
  std::uint64_t seed = 0;
};

int run_verify(const VerifyArgs& args) {
  mftb::verify::Options options;
  options.trials = args.trials;
  options.seed = args.seed;
  std::vector<mftb::verify::PropertyResult> results =
      mftb::verify::run_suite(args.suite, options);
  bool all_passed = true;
  for (const auto& result : results) {
    std::cout << result.name << ": " << (result.trials - result.failures)
              << "/" << result.trials << " pass\n";
    if (!result.passed()) {
      all_passed = false;
      std::cerr << "FAIL " << result.name << ": " << result.detail
                << " (reproducing seed " << result.first_failure_seed
                << ")\n";
    }
  }
  return all_passed ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"manifold feature toolbox: unit-sphere fusion geometry, "
               "consistency losses, subspace drift metrics, generalization "
               "bounds, and a synthetic two-tower trainer"};
  app.require_subcommand(1);

  DriftArgs drift_args;
  CLI::App* drift_cmd = app.add_subcommand(
      "drift", "off-manifold drift between two feature clouds");
  drift_cmd->add_option("--pretrained", drift_args.pretrained,
                        "pretrained feature file")->required();
  drift_cmd->add_option("--tuned", drift_args.tuned,
                        "tuned feature file")->required();
  drift_cmd->add_option("--rank", drift_args.rank,
                        "subspace rank (default 64)");
  drift_cmd->add_option("--ranks", drift_args.ranks,
                        "comma-separated rank sweep")->delimiter(',');
  CLI::Option* labels_opt = drift_cmd->add_option(
      "--labels", drift_args.labels_path, "per-row integer labels file");
  drift_cmd->add_option("--per-class-cap", drift_args.per_class_cap,
                        "keep at most this many rows per class")
      ->needs(labels_opt);
  drift_cmd->add_option("--out", drift_args.out_path, "CSV output path");
  drift_cmd->add_option("--format", drift_args.format,
                        "input format: bin or csv")
      ->check(CLI::IsMember({"bin", "csv"}));

  TrainArgs train_args;
  CLI::App* train_cmd = app.add_subcommand(
      "train", "train the synthetic two-tower task once");
  add_task_and_config_flags(train_cmd, &train_args);

  TrainArgs compare_args;
  CLI::App* compare_cmd = app.add_subcommand(
      "compare", "train once per lambda and tabulate drift and alignment");
  add_task_and_config_flags(compare_cmd, &compare_args);
  compare_cmd->add_option("--lambdas", compare_args.lambdas,
                          "comma-separated lambda values (default 0,12)")
      ->delimiter(',');
  compare_cmd->add_option("--seeds", compare_args.seeds,
                          "comma-separated seeds; one sweep per seed")
      ->delimiter(',');

  BoundArgs bound_args;
  CLI::App* bound_cmd = app.add_subcommand(
      "bound", "evaluate the closed-form generalization bound");
  bound_cmd->add_option("--tau", bound_args.params.tau, "temperature");
  bound_cmd->add_option("--classes", bound_args.params.num_classes,
                        "number of classes");
  bound_cmd->add_option("--samples", bound_args.params.num_samples,
                        "number of training samples");
  bound_cmd->add_option("--prompt-dim", bound_args.params.prompt_dim,
                        "parameter dimension");
  bound_cmd->add_option("--param-radius", bound_args.params.param_radius,
                        "parameter ball radius");
  bound_cmd->add_option("--lipschitz", bound_args.params.lipschitz,
                        "Lipschitz constant of the difference class");
  bound_cmd->add_option("--confidence", bound_args.params.confidence,
                        "confidence level rho in (0, 1)");
  bound_cmd->add_option("--epsilon", bound_args.params.epsilon,
                        "consistency level of the localized set");
  bound_cmd->add_option("--empirical-risk", bound_args.empirical_risk,
                        "measured empirical risk");
  bound_cmd->add_option("--l-con", bound_args.l_con,
                        "measured consistency loss (peeling mode)");
  bound_cmd->add_option("--mode", bound_args.mode, "fixed or peeling")
      ->check(CLI::IsMember({"fixed", "peeling"}));
  bound_cmd->add_option("--config", bound_args.config_path,
                        "key=value configuration file");

  VerifyArgs verify_args;
  CLI::App* verify_cmd = app.add_subcommand(
      "verify", "run the randomized property suites");
  verify_cmd->add_option("--suite", verify_args.suite,
                         "sphere, drift, bounds, grad, or all")
      ->check(CLI::IsMember({"sphere", "drift", "bounds", "grad", "all"}));
  verify_cmd->add_option("--trials", verify_args.trials,
                         "trial count (heavier suites scale this down)");
  verify_cmd->add_option("--seed", verify_args.seed, "base seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (drift_cmd->parsed()) {
      return run_drift(drift_args);
    }
    if (train_cmd->parsed()) {
      return run_train(train_cmd, &train_args);
    }
    if (compare_cmd->parsed()) {
      return run_compare(compare_cmd, &compare_args);
    }
    if (bound_cmd->parsed()) {
      return run_bound(bound_cmd, &bound_args);
    }
    if (verify_cmd->parsed()) {
      return run_verify(verify_args);
    }
  } catch (const mftb::DegenerateRegime& e) {
    std::cerr << "degenerate-regime: " << e.what() << "\n";
    return 1;
  } catch (const mftb::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
