#include "mftb/trainer.hpp"

#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "mftb/bounds.hpp"
#include "mftb/rng.hpp"

namespace mftb::trainer {

namespace {

// RNG stream ids; all draws are functions of (seed, stream, counter).
constexpr std::uint64_t kStreamGeometry = 1;
constexpr std::uint64_t kStreamTrainNoise = 2;
constexpr std::uint64_t kStreamTestNoise = 3;
constexpr std::uint64_t kStreamTextNoise = 4;
constexpr std::uint64_t kStreamPrototypes = 5;
constexpr std::uint64_t kStreamInit = 6;

constexpr int kResampleCap = 16;
constexpr int kPrototypeReplicas = 4;
constexpr double kPrototypeNoiseStd = 0.05;

// Shortcut coordinates on the test split keep half the train-split scale so
// the split-wise shortcut energies are strictly ordered.
constexpr double kTestShortcutScale = 0.5;

Eigen::VectorXd gaussian_vector(CounterRng& rng, Eigen::Index dim) {
  Eigen::VectorXd v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    v(i) = rng.next_normal();
  }
  return v;
}

Eigen::VectorXd sample_unit_feature(CounterRng& rng,
                                    const Eigen::VectorXd& mean,
                                    double noise_std, const char* what) {
  for (int attempt = 0; attempt < kResampleCap; ++attempt) {
    Eigen::VectorXd raw = mean;
    if (noise_std > 0.0) {
      raw += noise_std * gaussian_vector(rng, mean.size());
    }
    double norm = raw.norm();
    if (norm > sphere::kZeroNormThreshold) {
      return raw / norm;
    }
  }
  throw ZeroNorm(std::string(what) +
                 ": feature resampling exhausted its retry budget");
}

void validate_spec(const TaskSpec& spec) {
  if (spec.num_classes < 2) {
    throw InvalidArgument("task spec: num_classes must be >= 2");
  }
  if (spec.dim < 2) {
    throw InvalidArgument("task spec: dim must be >= 2");
  }
  if (spec.train_per_class < 1 || spec.test_per_class < 1) {
    throw InvalidArgument("task spec: samples per class must be >= 1");
  }
  if (spec.shortcut_strength < 0.0 || spec.shortcut_strength >= 1.0) {
    throw InvalidArgument("task spec: shortcut_strength must be in [0, 1)");
  }
  if (spec.noise_std < 0.0) {
    throw InvalidArgument("task spec: noise_std must be >= 0");
  }
  if (spec.transferable_rank < 1 || spec.shortcut_rank < 0) {
    throw RankConflict("task spec: transferable_rank must be >= 1 and "
                       "shortcut_rank >= 0");
  }
  if (spec.transferable_rank + spec.shortcut_rank > spec.dim) {
    throw RankConflict("task spec: transferable_rank + shortcut_rank = " +
                       std::to_string(spec.transferable_rank +
                                      spec.shortcut_rank) +
                       " exceeds dim " + std::to_string(spec.dim));
  }
}

}  // namespace

void TrainerConfig::validate() const {
  if (lambda < 0.0) {
    throw InvalidArgument("trainer config: lambda must be >= 0");
  }
  if (tau <= 0.0) {
    throw InvalidArgument("trainer config: tau must be positive");
  }
  if (learning_rate < 0.0) {
    throw InvalidArgument("trainer config: learning_rate must be >= 0");
  }
  if (epochs < 1) {
    throw InvalidArgument("trainer config: epochs must be >= 1");
  }
  if (d_pca_report < 1) {
    throw InvalidArgument("trainer config: d_pca_report must be >= 1");
  }
  if (init_std <= 0.0) {
    throw InvalidArgument("trainer config: init_std must be positive");
  }
}

SyntheticTask generate_task(const TaskSpec& spec, std::uint64_t seed) {
  validate_spec(spec);
  const Eigen::Index d = spec.dim;
  const Eigen::Index q = spec.transferable_rank;
  const Eigen::Index s = spec.shortcut_rank;
  const Eigen::Index c = spec.num_classes;

  SyntheticTask task;
  task.spec = spec;
  task.seed = seed;

  CounterRng geometry(seed, kStreamGeometry);

  // One joint QR factorization yields mutually orthonormal transferable and
  // shortcut bases.
  Eigen::MatrixXd raw(d, q + s);
  for (Eigen::Index j = 0; j < q + s; ++j) {
    raw.col(j) = gaussian_vector(geometry, d);
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(raw);
  Eigen::MatrixXd orthonormal =
      qr.householderQ() * Eigen::MatrixXd::Identity(d, q + s);
  task.transferable_basis = orthonormal.leftCols(q);
  task.shortcut_basis = orthonormal.rightCols(s);

  // Class directions live in the transferable span and share a common hub
  // direction, so frozen features occupy a narrow cone the way pretrained
  // embedding clouds do; each class keeps a unique innovation coordinate
  // (wrapping when C > q) plus a small jitter.
  task.class_directions.resize(c, d);
  Eigen::VectorXd hub =
      Eigen::VectorXd::Constant(q, 1.0 / std::sqrt(static_cast<double>(q)));
  for (Eigen::Index k = 0; k < c; ++k) {
    Eigen::VectorXd coords = hub;
    coords(k % q) += 0.5;
    coords += 0.1 * gaussian_vector(geometry, q);
    Eigen::VectorXd direction = task.transferable_basis * coords;
    double norm = direction.norm();
    if (norm <= sphere::kZeroNormThreshold) {
      throw ZeroNorm("generate_task: class direction collapsed");
    }
    task.class_directions.row(k) = (direction / norm).transpose();
  }

  const bool has_shortcut = s > 0 && spec.shortcut_strength > 0.0;

  CounterRng train_noise(seed, kStreamTrainNoise);
  task.train_vis.resize(c * spec.train_per_class, d);
  task.train_labels.reserve(static_cast<std::size_t>(c) *
                            static_cast<std::size_t>(spec.train_per_class));
  Eigen::Index row = 0;
  for (Eigen::Index k = 0; k < c; ++k) {
    Eigen::VectorXd mean = task.class_directions.row(k).transpose();
    if (has_shortcut) {
      // Label-aligned shortcut coordinate: class k always rides direction
      // k mod s at full strength.
      mean += spec.shortcut_strength * task.shortcut_basis.col(k % s);
    }
    for (int i = 0; i < spec.train_per_class; ++i, ++row) {
      task.train_vis.row(row) =
          sample_unit_feature(train_noise, mean, spec.noise_std,
                              "train split").transpose();
      task.train_labels.push_back(static_cast<int>(k));
    }
  }

  CounterRng test_noise(seed, kStreamTestNoise);
  task.test_vis.resize(c * spec.test_per_class, d);
  task.test_labels.reserve(static_cast<std::size_t>(c) *
                           static_cast<std::size_t>(spec.test_per_class));
  row = 0;
  for (Eigen::Index k = 0; k < c; ++k) {
    for (int i = 0; i < spec.test_per_class; ++i, ++row) {
      Eigen::VectorXd mean = task.class_directions.row(k).transpose();
      if (has_shortcut) {
        // Label-independent: random direction, random sign, half scale.
        Eigen::Index j = static_cast<Eigen::Index>(
            test_noise.next_below(static_cast<std::uint64_t>(s)));
        double sign = test_noise.next_double() < 0.5 ? -1.0 : 1.0;
        mean += sign * kTestShortcutScale * spec.shortcut_strength *
                task.shortcut_basis.col(j);
      }
      task.test_vis.row(row) =
          sample_unit_feature(test_noise, mean, spec.noise_std,
                              "test split").transpose();
      task.test_labels.push_back(static_cast<int>(k));
    }
  }

  CounterRng text_noise(seed, kStreamTextNoise);
  task.frozen_txt.resize(c, d);
  for (Eigen::Index k = 0; k < c; ++k) {
    task.frozen_txt.row(k) =
        sample_unit_feature(text_noise,
                            task.class_directions.row(k).transpose(),
                            spec.noise_std, "frozen text").transpose();
  }
  return task;
}

sphere::UnitVector prompt_branch(const sphere::UnitVector& frozen,
                                 const Eigen::MatrixXd& map,
                                 const Eigen::VectorXd& bias) {
  if (map.rows() != frozen.dim() || map.cols() != frozen.dim() ||
      bias.size() != frozen.dim()) {
    throw ShapeMismatch("prompt_branch: parameter shapes do not match dim " +
                        std::to_string(frozen.dim()));
  }
  return sphere::normalize(frozen.vec() + map * frozen.vec() + bias);
}

namespace {

losses::PrototypeBank build_task_prototypes(const SyntheticTask& task) {
  CounterRng rng(task.seed, kStreamPrototypes);
  std::vector<Eigen::MatrixXd> per_class;
  per_class.reserve(static_cast<std::size_t>(task.frozen_txt.rows()));
  for (Eigen::Index c = 0; c < task.frozen_txt.rows(); ++c) {
    Eigen::MatrixXd replicas(kPrototypeReplicas, task.frozen_txt.cols());
    for (int r = 0; r < kPrototypeReplicas; ++r) {
      replicas.row(r) =
          sample_unit_feature(rng, task.frozen_txt.row(c).transpose(),
                              kPrototypeNoiseStd, "prototype replicas")
              .transpose();
    }
    per_class.push_back(std::move(replicas));
  }
  return losses::build_prototypes(std::move(per_class));
}

PromptParams init_params(Eigen::Index dim, double init_std,
                         std::uint64_t seed) {
  CounterRng rng(seed, kStreamInit);
  PromptParams p = PromptParams::zeros(dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    for (Eigen::Index j = 0; j < dim; ++j) {
      p.vis_map(i, j) = init_std * rng.next_normal();
    }
  }
  for (Eigen::Index i = 0; i < dim; ++i) {
    p.vis_bias(i) = init_std * rng.next_normal();
  }
  for (Eigen::Index i = 0; i < dim; ++i) {
    for (Eigen::Index j = 0; j < dim; ++j) {
      p.txt_map(i, j) = init_std * rng.next_normal();
    }
  }
  for (Eigen::Index i = 0; i < dim; ++i) {
    p.txt_bias(i) = init_std * rng.next_normal();
  }
  return p;
}

double classification_accuracy(const Eigen::MatrixXd& fused_vis,
                               const Eigen::MatrixXd& fused_txt,
                               const std::vector<int>& labels) {
  Eigen::MatrixXd scores = fused_vis * fused_txt.transpose();
  Eigen::Index correct = 0;
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    Eigen::Index predicted = 0;
    scores.row(i).maxCoeff(&predicted);
    if (predicted == labels[static_cast<std::size_t>(i)]) {
      ++correct;
    }
  }
  return static_cast<double>(correct) /
         static_cast<double>(scores.rows());
}

}  // namespace

TrainingReport train(const SyntheticTask& task, const TrainerConfig& config) {
  config.validate();
  const Eigen::Index d = task.train_vis.cols();
  losses::PrototypeBank prototypes = build_task_prototypes(task);
  PromptParams params = init_params(d, config.init_std, config.seed);

  TrainingReport report;
  report.series.reserve(static_cast<std::size_t>(config.epochs));
  report.mean_fused_gap_sq.reserve(static_cast<std::size_t>(config.epochs));
  report.mean_prompt_gap_sq.reserve(static_cast<std::size_t>(config.epochs));

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    losses::LossBreakdown breakdown;
    PromptParams grads;
    try {
      grads = losses::grad_total(task.train_vis, task.frozen_txt,
                                 task.train_labels, prototypes, config.lambda,
                                 config.tau, params, &breakdown);
      // Contraction diagnostics on the batch in effect this epoch.
      Eigen::MatrixXd prompt_vis = losses::prompt_branch_rows(
          task.train_vis, params.vis_map, params.vis_bias);
      Eigen::MatrixXd fused_vis =
          losses::fuse_rows(task.train_vis, prompt_vis);
      report.mean_prompt_gap_sq.push_back(
          (prompt_vis - task.train_vis).rowwise().squaredNorm().mean());
      report.mean_fused_gap_sq.push_back(
          (fused_vis - task.train_vis).rowwise().squaredNorm().mean());
    } catch (const NearOpposition& err) {
      throw NearOpposition("epoch " + std::to_string(epoch) + ": " +
                           err.what());
    } catch (const ZeroNorm& err) {
      throw NonFinite("epoch " + std::to_string(epoch) +
                      ": prompt branch collapsed (" + err.what() + ")");
    }
    if (!std::isfinite(breakdown.total)) {
      throw NonFinite("epoch " + std::to_string(epoch) +
                      ": loss diverged to a non-finite value");
    }
    report.series.push_back(breakdown);
    params.axpy(-config.learning_rate, grads);
    if (!params.all_finite()) {
      throw NonFinite("epoch " + std::to_string(epoch) +
                      ": parameters diverged to non-finite values");
    }
  }

  // Final evaluation.
  Eigen::MatrixXd train_prompt = losses::prompt_branch_rows(
      task.train_vis, params.vis_map, params.vis_bias);
  Eigen::MatrixXd train_fused = losses::fuse_rows(task.train_vis, train_prompt);
  Eigen::MatrixXd test_prompt = losses::prompt_branch_rows(
      task.test_vis, params.vis_map, params.vis_bias);
  Eigen::MatrixXd test_fused = losses::fuse_rows(task.test_vis, test_prompt);
  Eigen::MatrixXd txt_prompt = losses::prompt_branch_rows(
      task.frozen_txt, params.txt_map, params.txt_bias);
  Eigen::MatrixXd txt_fused = losses::fuse_rows(task.frozen_txt, txt_prompt);

  report.train_accuracy =
      classification_accuracy(train_fused, txt_fused, task.train_labels);
  report.test_accuracy =
      classification_accuracy(test_fused, txt_fused, task.test_labels);

  drift::FeatureMatrix frozen_cloud{task.test_vis, true};
  drift::FeatureMatrix fused_cloud{test_fused, true};
  report.drift =
      drift::manifold_drift(frozen_cloud, fused_cloud, config.d_pca_report);

  report.mean_alignment =
      (test_fused.array() * task.test_vis.array()).rowwise().sum().mean();
  report.kappa_min = bounds::non_opposition_margins(task.test_vis, test_prompt);
  report.final_params = params;
  return report;
}

std::vector<LambdaRow> compare_lambda(const SyntheticTask& task,
                                      const TrainerConfig& config_base,
                                      const std::vector<double>& lambdas) {
  std::vector<LambdaRow> rows;
  rows.reserve(lambdas.size());
  for (double lambda : lambdas) {
    TrainerConfig config = config_base;
    config.lambda = lambda;
    TrainingReport report = train(task, config);
    rows.push_back({lambda, report.drift.delta, report.mean_alignment,
                    report.test_accuracy});
  }
  return rows;
}

}  // namespace mftb::trainer
