#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "mftb/drift.hpp"
#include "mftb/losses.hpp"
#include "mftb/prompt_params.hpp"
#include "mftb/sphere.hpp"

namespace mftb::trainer {

/// Generator knobs for the synthetic two-tower task. Class semantics live in
/// a transferable subspace; a disjoint shortcut subspace carries coordinates
/// that correlate with labels on the train split only.
struct TaskSpec {
  int num_classes = 8;
  int dim = 64;
  int transferable_rank = 8;
  int shortcut_rank = 8;
  int train_per_class = 16;
  int test_per_class = 64;
  double shortcut_strength = 0.6;  // in [0, 1)
  double noise_std = 0.1;
};

/// A materialized task: bases, class directions, frozen feature clouds and
/// labels for both splits. Deterministic given (spec, seed).
struct SyntheticTask {
  TaskSpec spec;
  std::uint64_t seed = 0;
  Eigen::MatrixXd transferable_basis;  // d x q, orthonormal
  Eigen::MatrixXd shortcut_basis;      // d x s, orthonormal, disjoint
  Eigen::MatrixXd class_directions;    // C x d, unit rows in the span of Q
  Eigen::MatrixXd train_vis;           // (C * train_per_class) x d, unit rows
  std::vector<int> train_labels;
  Eigen::MatrixXd test_vis;            // (C * test_per_class) x d, unit rows
  std::vector<int> test_labels;
  Eigen::MatrixXd frozen_txt;          // C x d, unit rows
};

struct TrainerConfig {
  double lambda = 12.0;
  double tau = 8.0;
  double learning_rate = 0.05;
  int epochs = 400;
  std::uint64_t seed = 0;
  Eigen::Index d_pca_report = 16;
  double init_std = 0.02;

  void validate() const;
};

/// Everything a finished run reports: the per-epoch loss series, accuracies,
/// the drift of the fused held-out cloud against the frozen held-out cloud,
/// plus the alignment and margin statistics on the held-out pool.
struct TrainingReport {
  std::vector<losses::LossBreakdown> series;
  double train_accuracy = 0.0;
  double test_accuracy = 0.0;
  drift::DriftReport drift;
  double mean_alignment = 0.0;  // mean <fused, frozen> over the held-out pool
  double kappa_min = 0.0;       // min of 1 + <frozen, prompt> on held-out
  // Per-epoch train-batch means of ||fused - frozen||^2 and
  // ||prompt - frozen||^2; the first is at most half the second.
  std::vector<double> mean_fused_gap_sq;
  std::vector<double> mean_prompt_gap_sq;
  PromptParams final_params;
};

struct LambdaRow {
  double lambda = 0.0;
  double delta = 0.0;
  double mean_alignment = 0.0;
  double test_accuracy = 0.0;
};

/// Builds the synthetic task. Throws RankConflict when the subspace ranks do
/// not fit the dimension and ZeroNorm if feature resampling exhausts its
/// retry budget.
SyntheticTask generate_task(const TaskSpec& spec, std::uint64_t seed);

/// normalize(frozen + map * frozen + bias), the affine prompt branch on one
/// feature.
sphere::UnitVector prompt_branch(const sphere::UnitVector& frozen,
                                 const Eigen::MatrixXd& map,
                                 const Eigen::VectorXd& bias);

/// Full-batch gradient descent on the total loss for config.epochs epochs.
/// Prototypes are built from the task's frozen text features plus small-noise
/// replicas. Deterministic given (task, config).
TrainingReport train(const SyntheticTask& task, const TrainerConfig& config);

/// Runs train once per lambda with an identical task and seed and collects
/// the summary row of each run, in the given lambda order.
std::vector<LambdaRow> compare_lambda(const SyntheticTask& task,
                                      const TrainerConfig& config_base,
                                      const std::vector<double>& lambdas);

}  // namespace mftb::trainer
