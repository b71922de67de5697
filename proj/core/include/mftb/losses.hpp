#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "mftb/errors.hpp"
#include "mftb/prompt_params.hpp"
#include "mftb/sphere.hpp"

namespace mftb::losses {

/// Temperature-scaled cosine logits for one sample. Entries live in
/// [-tau, tau] because they are tau times a cosine of unit features.
struct LogitVector {
  Eigen::VectorXd values;
  double temperature = 1.0;
};

/// All scalar components of the training objective:
///   total = ce + lambda * (img + txt),  con = img + txt.
struct LossBreakdown {
  double ce = 0.0;
  double img = 0.0;
  double txt = 0.0;
  double con = 0.0;
  double total = 0.0;
  double lambda = 0.0;
};

/// Per-class description feature sets and the normalized semantic prototypes
/// aggregated from them: w_c = normalize(sum of class-c features).
class PrototypeBank {
public:
  static PrototypeBank build(std::vector<Eigen::MatrixXd> per_class_features,
                             std::vector<std::string> provenance = {});

  Eigen::Index num_classes() const { return prototypes_.rows(); }
  Eigen::Index dim() const { return prototypes_.cols(); }

  /// C x d matrix of unit prototype rows.
  const Eigen::MatrixXd& prototypes() const { return prototypes_; }
  const Eigen::MatrixXd& class_features(Eigen::Index c) const;
  const std::string& provenance(Eigen::Index c) const;

private:
  PrototypeBank() = default;
  std::vector<Eigen::MatrixXd> class_features_;
  std::vector<std::string> provenance_;
  Eigen::MatrixXd prototypes_;
};

/// One training batch of paired frozen / prompt-branch features. Rows are
/// unit vectors; visual matrices are N x d, text matrices C x d.
struct FeatureBatch {
  Eigen::MatrixXd frozen_vis;
  Eigen::MatrixXd prompt_vis;
  Eigen::MatrixXd frozen_txt;
  Eigen::MatrixXd prompt_txt;
  std::vector<int> labels;
};

/// Builds PrototypeBank from per-class unit feature rows.
/// Throws EmptyClass for a class with no features and ZeroNorm if a class's
/// features cancel exactly.
PrototypeBank build_prototypes(std::vector<Eigen::MatrixXd> per_class_features,
                               std::vector<std::string> provenance = {});

/// Visual-side consistency: mean over rows of (1 - <fused_i, frozen_i>).
/// Value in [0, 2]. Both matrices must be N x d with unit rows (within 1e-6).
double consistency_img(const Eigen::MatrixXd& fused_vis,
                       const Eigen::MatrixXd& frozen_vis);

/// Text-side consistency against the prototype bank: mean over classes of
/// (1 - <fused_txt_c, w_c>). Value in [0, 2].
double consistency_txt(const Eigen::MatrixXd& fused_txt,
                       const PrototypeBank& prototypes);

/// Logits for one visual row against all fused text rows:
/// values[c] = tau * <fused_vis_row, fused_txt_c>, clamped to [-tau, tau].
LogitVector logits(const Eigen::VectorXd& fused_vis_row,
                   const Eigen::MatrixXd& fused_txt, double tau);

/// log sum_c exp(l_c) - l_label, computed with max subtraction. For logits
/// of unit features, 0 <= result <= log C + 2 tau.
double cross_entropy(const LogitVector& logit_vector, int label);

/// Row-wise normalization. Throws ZeroNorm naming the offending row.
Eigen::MatrixXd normalize_rows(
    const Eigen::MatrixXd& rows,
    double zero_threshold = sphere::kZeroNormThreshold);

/// Row-wise fusion (z_i + h_i) / ||z_i + h_i||. Throws NearOpposition naming
/// the offending row when a pair violates the margin.
Eigen::MatrixXd fuse_rows(const Eigen::MatrixXd& frozen,
                          const Eigen::MatrixXd& prompt,
                          double kappa = sphere::kOppositionMargin);

/// Fuses the batch per modality, computes logits on the fused features, and
/// returns every loss component.
LossBreakdown total_loss(const FeatureBatch& batch,
                         const PrototypeBank& prototypes, double lambda,
                         double tau,
                         double kappa = sphere::kOppositionMargin);

/// Exact analytic gradient of the total loss with respect to the prompt
/// parameters, chaining through the affine perturbation, the prompt-branch
/// normalization, and the fusion renormalization. Frozen features are
/// constants. When breakdown is non-null the forward losses are written
/// there, so a training step needs a single pass.
PromptParams grad_total(const Eigen::MatrixXd& frozen_vis,
                        const Eigen::MatrixXd& frozen_txt,
                        const std::vector<int>& labels,
                        const PrototypeBank& prototypes, double lambda,
                        double tau, const PromptParams& params,
                        LossBreakdown* breakdown = nullptr,
                        double kappa = sphere::kOppositionMargin);

/// Forward pass of the affine prompt branch on every row:
/// row_i -> normalize(row_i + map * row_i + bias).
Eigen::MatrixXd prompt_branch_rows(const Eigen::MatrixXd& frozen,
                                   const Eigen::MatrixXd& map,
                                   const Eigen::VectorXd& bias);

/// total_loss evaluated from prompt parameters instead of materialized
/// prompt features; shares the exact forward path with grad_total.
LossBreakdown total_loss_from_params(const Eigen::MatrixXd& frozen_vis,
                                     const Eigen::MatrixXd& frozen_txt,
                                     const std::vector<int>& labels,
                                     const PrototypeBank& prototypes,
                                     double lambda, double tau,
                                     const PromptParams& params,
                                     double kappa = sphere::kOppositionMargin);

}  // namespace mftb::losses
