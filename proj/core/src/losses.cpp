#include "mftb/losses.hpp"

#include <algorithm>
#include <cmath>

namespace mftb::losses {

namespace {

constexpr double kRowUnitTolerance = 1e-6;

void require_unit_rows(const Eigen::MatrixXd& rows, const char* name) {
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    double norm = rows.row(i).norm();
    if (std::abs(norm - 1.0) > kRowUnitTolerance) {
      throw NotNormalized(std::string(name) + " row " + std::to_string(i) +
                          " has norm " + std::to_string(norm));
    }
  }
}

void require_shape(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                   const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeMismatch(std::string(what) + ": " + std::to_string(a.rows()) +
                        "x" + std::to_string(a.cols()) + " vs " +
                        std::to_string(b.rows()) + "x" +
                        std::to_string(b.cols()));
  }
}

// Row-wise softmax probabilities and the per-row cross-entropy values, both
// with max subtraction.
void softmax_and_ce(const Eigen::MatrixXd& logits,
                    const std::vector<int>& labels, Eigen::MatrixXd* probs,
                    double* mean_ce) {
  const Eigen::Index n = logits.rows();
  const Eigen::Index c = logits.cols();
  probs->resize(n, c);
  double ce_sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double row_max = logits.row(i).maxCoeff();
    Eigen::VectorXd shifted =
        (logits.row(i).array() - row_max).exp().matrix().transpose();
    double denom = shifted.sum();
    probs->row(i) = (shifted / denom).transpose();
    double lse = row_max + std::log(denom);
    ce_sum += lse - logits(i, labels[static_cast<std::size_t>(i)]);
  }
  *mean_ce = ce_sum / static_cast<double>(n);
}

}  // namespace

PrototypeBank PrototypeBank::build(
    std::vector<Eigen::MatrixXd> per_class_features,
    std::vector<std::string> provenance) {
  if (per_class_features.empty()) {
    throw EmptyClass("prototype bank needs at least one class");
  }
  const Eigen::Index dim = per_class_features.front().cols();
  PrototypeBank bank;
  bank.prototypes_.resize(static_cast<Eigen::Index>(per_class_features.size()),
                          dim);
  for (std::size_t c = 0; c < per_class_features.size(); ++c) {
    const Eigen::MatrixXd& features = per_class_features[c];
    if (features.rows() == 0) {
      throw EmptyClass("class " + std::to_string(c) +
                       " has no description features");
    }
    if (features.cols() != dim) {
      throw ShapeMismatch("class " + std::to_string(c) + " features have dim " +
                          std::to_string(features.cols()) + ", expected " +
                          std::to_string(dim));
    }
    require_unit_rows(features, "description features");
    Eigen::VectorXd sum = features.colwise().sum().transpose();
    double norm = sum.norm();
    if (norm <= sphere::kZeroNormThreshold) {
      throw ZeroNorm("class " + std::to_string(c) +
                     " description features cancel exactly");
    }
    bank.prototypes_.row(c) = (sum / norm).transpose();
  }
  if (!provenance.empty() && provenance.size() != per_class_features.size()) {
    throw ShapeMismatch("provenance size does not match class count");
  }
  bank.class_features_ = std::move(per_class_features);
  bank.provenance_ = std::move(provenance);
  bank.provenance_.resize(bank.class_features_.size());
  return bank;
}

const Eigen::MatrixXd& PrototypeBank::class_features(Eigen::Index c) const {
  return class_features_.at(static_cast<std::size_t>(c));
}

const std::string& PrototypeBank::provenance(Eigen::Index c) const {
  return provenance_.at(static_cast<std::size_t>(c));
}

PrototypeBank build_prototypes(std::vector<Eigen::MatrixXd> per_class_features,
                               std::vector<std::string> provenance) {
  return PrototypeBank::build(std::move(per_class_features),
                              std::move(provenance));
}

double consistency_img(const Eigen::MatrixXd& fused_vis,
                       const Eigen::MatrixXd& frozen_vis) {
  require_shape(fused_vis, frozen_vis, "consistency_img");
  if (fused_vis.rows() == 0) {
    throw ShapeMismatch("consistency_img: empty batch");
  }
  require_unit_rows(fused_vis, "fused visual features");
  require_unit_rows(frozen_vis, "frozen visual features");
  double dot_sum = (fused_vis.array() * frozen_vis.array()).sum();
  return 1.0 - dot_sum / static_cast<double>(fused_vis.rows());
}

double consistency_txt(const Eigen::MatrixXd& fused_txt,
                       const PrototypeBank& prototypes) {
  if (fused_txt.rows() != prototypes.num_classes() ||
      fused_txt.cols() != prototypes.dim()) {
    throw ShapeMismatch("consistency_txt: fused text is " +
                        std::to_string(fused_txt.rows()) + "x" +
                        std::to_string(fused_txt.cols()) + ", bank holds " +
                        std::to_string(prototypes.num_classes()) + "x" +
                        std::to_string(prototypes.dim()));
  }
  require_unit_rows(fused_txt, "fused text features");
  double dot_sum = (fused_txt.array() * prototypes.prototypes().array()).sum();
  return 1.0 - dot_sum / static_cast<double>(fused_txt.rows());
}

LogitVector logits(const Eigen::VectorXd& fused_vis_row,
                   const Eigen::MatrixXd& fused_txt, double tau) {
  if (tau <= 0.0) {
    throw InvalidArgument("logits: tau must be positive");
  }
  if (fused_vis_row.size() != fused_txt.cols()) {
    throw ShapeMismatch("logits: visual dim " +
                        std::to_string(fused_vis_row.size()) +
                        " vs text dim " + std::to_string(fused_txt.cols()));
  }
  LogitVector out;
  out.temperature = tau;
  out.values = tau * (fused_txt * fused_vis_row);
  // Unit features keep |value| <= tau up to rounding; clamp the overshoot.
  out.values = out.values.cwiseMax(-tau).cwiseMin(tau);
  return out;
}

double cross_entropy(const LogitVector& logit_vector, int label) {
  const Eigen::Index c = logit_vector.values.size();
  if (label < 0 || label >= c) {
    throw LabelOutOfRange("cross_entropy: label " + std::to_string(label) +
                          " for " + std::to_string(c) + " classes");
  }
  double max_logit = logit_vector.values.maxCoeff();
  double sum = (logit_vector.values.array() - max_logit).exp().sum();
  return max_logit + std::log(sum) - logit_vector.values(label);
}

Eigen::MatrixXd normalize_rows(const Eigen::MatrixXd& rows,
                               double zero_threshold) {
  Eigen::MatrixXd out(rows.rows(), rows.cols());
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    double norm = rows.row(i).norm();
    if (norm <= zero_threshold) {
      throw ZeroNorm("normalize_rows: row " + std::to_string(i) +
                     " has norm " + std::to_string(norm));
    }
    out.row(i) = rows.row(i) / norm;
  }
  return out;
}

Eigen::MatrixXd fuse_rows(const Eigen::MatrixXd& frozen,
                          const Eigen::MatrixXd& prompt, double kappa) {
  require_shape(frozen, prompt, "fuse_rows");
  Eigen::MatrixXd sum = frozen + prompt;
  Eigen::MatrixXd out(sum.rows(), sum.cols());
  for (Eigen::Index i = 0; i < sum.rows(); ++i) {
    double norm_sq = sum.row(i).squaredNorm();
    if (norm_sq < 2.0 * kappa) {
      throw NearOpposition("fuse_rows: row " + std::to_string(i) +
                           " violates the non-opposition margin, ||z+h||^2 = " +
                           std::to_string(norm_sq));
    }
    out.row(i) = sum.row(i) / std::sqrt(norm_sq);
  }
  return out;
}

namespace {

void validate_batch_shapes(const Eigen::MatrixXd& frozen_vis,
                           const Eigen::MatrixXd& frozen_txt,
                           const std::vector<int>& labels,
                           const PrototypeBank& prototypes) {
  const Eigen::Index d = frozen_vis.cols();
  if (frozen_vis.rows() == 0) {
    throw ShapeMismatch("empty visual batch");
  }
  if (frozen_txt.cols() != d) {
    throw ShapeMismatch("text dim " + std::to_string(frozen_txt.cols()) +
                        " vs visual dim " + std::to_string(d));
  }
  if (frozen_txt.rows() != prototypes.num_classes() ||
      prototypes.dim() != d) {
    throw ShapeMismatch("prototype bank shape does not match batch");
  }
  if (static_cast<Eigen::Index>(labels.size()) != frozen_vis.rows()) {
    throw ShapeMismatch("label count " + std::to_string(labels.size()) +
                        " vs batch size " + std::to_string(frozen_vis.rows()));
  }
  const int num_classes = static_cast<int>(frozen_txt.rows());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= num_classes) {
      throw LabelOutOfRange("label " + std::to_string(labels[i]) +
                            " at index " + std::to_string(i));
    }
  }
}

LossBreakdown assemble_breakdown(double ce, double img, double txt,
                                 double lambda) {
  LossBreakdown b;
  b.ce = ce;
  b.img = img;
  b.txt = txt;
  b.con = img + txt;
  b.lambda = lambda;
  b.total = ce + lambda * b.con;
  return b;
}

}  // namespace

LossBreakdown total_loss(const FeatureBatch& batch,
                         const PrototypeBank& prototypes, double lambda,
                         double tau, double kappa) {
  if (lambda < 0.0) {
    throw InvalidArgument("total_loss: lambda must be non-negative");
  }
  if (tau <= 0.0) {
    throw InvalidArgument("total_loss: tau must be positive");
  }
  validate_batch_shapes(batch.frozen_vis, batch.frozen_txt, batch.labels,
                        prototypes);
  require_shape(batch.frozen_vis, batch.prompt_vis, "visual batch");
  require_shape(batch.frozen_txt, batch.prompt_txt, "text batch");

  Eigen::MatrixXd fused_vis =
      fuse_rows(batch.frozen_vis, batch.prompt_vis, kappa);
  Eigen::MatrixXd fused_txt =
      fuse_rows(batch.frozen_txt, batch.prompt_txt, kappa);

  Eigen::MatrixXd logit_matrix = tau * fused_vis * fused_txt.transpose();
  Eigen::MatrixXd probs;
  double ce = 0.0;
  softmax_and_ce(logit_matrix, batch.labels, &probs, &ce);

  double img = consistency_img(fused_vis, batch.frozen_vis);
  double txt = consistency_txt(fused_txt, prototypes);
  return assemble_breakdown(ce, img, txt, lambda);
}

Eigen::MatrixXd prompt_branch_rows(const Eigen::MatrixXd& frozen,
                                   const Eigen::MatrixXd& map,
                                   const Eigen::VectorXd& bias) {
  if (map.rows() != frozen.cols() || map.cols() != frozen.cols() ||
      bias.size() != frozen.cols()) {
    throw ShapeMismatch("prompt_branch_rows: parameter shapes do not match "
                        "feature dim " +
                        std::to_string(frozen.cols()));
  }
  Eigen::MatrixXd perturbed = frozen + frozen * map.transpose();
  perturbed.rowwise() += bias.transpose();
  return normalize_rows(perturbed);
}

namespace {

// Shared forward state for one modality: the pre-normalization perturbed
// rows, the prompt features, the fused features, and the two norms needed by
// the backward pass.
struct BranchForward {
  Eigen::MatrixXd perturbed;     // U = Z + Z M^T + 1 b^T
  Eigen::VectorXd perturbed_norm;
  Eigen::MatrixXd prompt;        // H, unit rows
  Eigen::VectorXd fused_norm;    // ||z_i + h_i||
  Eigen::MatrixXd fused;         // F, unit rows
};

BranchForward branch_forward(const Eigen::MatrixXd& frozen,
                             const Eigen::MatrixXd& map,
                             const Eigen::VectorXd& bias, double kappa,
                             const char* side) {
  BranchForward fwd;
  fwd.perturbed = frozen + frozen * map.transpose();
  fwd.perturbed.rowwise() += bias.transpose();
  const Eigen::Index n = frozen.rows();
  fwd.perturbed_norm.resize(n);
  fwd.prompt.resize(n, frozen.cols());
  fwd.fused_norm.resize(n);
  fwd.fused.resize(n, frozen.cols());
  for (Eigen::Index i = 0; i < n; ++i) {
    double un = fwd.perturbed.row(i).norm();
    if (un <= sphere::kZeroNormThreshold) {
      throw ZeroNorm(std::string(side) + " prompt branch row " +
                     std::to_string(i) + " collapsed to zero");
    }
    fwd.perturbed_norm(i) = un;
    fwd.prompt.row(i) = fwd.perturbed.row(i) / un;
    Eigen::RowVectorXd g = frozen.row(i) + fwd.prompt.row(i);
    double gn_sq = g.squaredNorm();
    if (gn_sq < 2.0 * kappa) {
      throw NearOpposition(std::string(side) + " fusion row " +
                           std::to_string(i) +
                           " violates the non-opposition margin");
    }
    fwd.fused_norm(i) = std::sqrt(gn_sq);
    fwd.fused.row(i) = g / fwd.fused_norm(i);
  }
  return fwd;
}

// Pulls a gradient on the fused rows back to gradients on (map, bias):
// through the fusion renormalization, the identity g = z + h, and the
// prompt-branch normalization. Tangent projection (I - y y^T) / ||input||
// applies at each normalization.
void branch_backward(const Eigen::MatrixXd& frozen, const BranchForward& fwd,
                     const Eigen::MatrixXd& grad_fused,
                     Eigen::MatrixXd* grad_map, Eigen::VectorXd* grad_bias) {
  const Eigen::Index n = frozen.rows();
  Eigen::MatrixXd grad_perturbed(n, frozen.cols());
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::RowVectorXd gf = grad_fused.row(i);
    const Eigen::RowVectorXd& f = fwd.fused.row(i);
    Eigen::RowVectorXd grad_g = (gf - gf.dot(f) * f) / fwd.fused_norm(i);
    const Eigen::RowVectorXd& h = fwd.prompt.row(i);
    grad_perturbed.row(i) =
        (grad_g - grad_g.dot(h) * h) / fwd.perturbed_norm(i);
  }
  *grad_map = grad_perturbed.transpose() * frozen;
  *grad_bias = grad_perturbed.colwise().sum().transpose();
}

}  // namespace

LossBreakdown total_loss_from_params(const Eigen::MatrixXd& frozen_vis,
                                     const Eigen::MatrixXd& frozen_txt,
                                     const std::vector<int>& labels,
                                     const PrototypeBank& prototypes,
                                     double lambda, double tau,
                                     const PromptParams& params,
                                     double kappa) {
  validate_batch_shapes(frozen_vis, frozen_txt, labels, prototypes);
  BranchForward vis =
      branch_forward(frozen_vis, params.vis_map, params.vis_bias, kappa,
                     "visual");
  BranchForward txt =
      branch_forward(frozen_txt, params.txt_map, params.txt_bias, kappa,
                     "text");
  Eigen::MatrixXd logit_matrix = tau * vis.fused * txt.fused.transpose();
  Eigen::MatrixXd probs;
  double ce = 0.0;
  softmax_and_ce(logit_matrix, labels, &probs, &ce);
  double img = consistency_img(vis.fused, frozen_vis);
  double txtc = consistency_txt(txt.fused, prototypes);
  return assemble_breakdown(ce, img, txtc, lambda);
}

PromptParams grad_total(const Eigen::MatrixXd& frozen_vis,
                        const Eigen::MatrixXd& frozen_txt,
                        const std::vector<int>& labels,
                        const PrototypeBank& prototypes, double lambda,
                        double tau, const PromptParams& params,
                        LossBreakdown* breakdown, double kappa) {
  if (lambda < 0.0) {
    throw InvalidArgument("grad_total: lambda must be non-negative");
  }
  if (tau <= 0.0) {
    throw InvalidArgument("grad_total: tau must be positive");
  }
  validate_batch_shapes(frozen_vis, frozen_txt, labels, prototypes);

  const Eigen::Index n = frozen_vis.rows();
  const Eigen::Index c = frozen_txt.rows();

  BranchForward vis =
      branch_forward(frozen_vis, params.vis_map, params.vis_bias, kappa,
                     "visual");
  BranchForward txt =
      branch_forward(frozen_txt, params.txt_map, params.txt_bias, kappa,
                     "text");

  Eigen::MatrixXd logit_matrix = tau * vis.fused * txt.fused.transpose();
  Eigen::MatrixXd probs;
  double ce = 0.0;
  softmax_and_ce(logit_matrix, labels, &probs, &ce);

  if (breakdown != nullptr) {
    double img = consistency_img(vis.fused, frozen_vis);
    double txtc = consistency_txt(txt.fused, prototypes);
    *breakdown = assemble_breakdown(ce, img, txtc, lambda);
  }

  // d(ce)/d(logits) = (p - onehot) / N.
  Eigen::MatrixXd logit_grad = probs;
  for (Eigen::Index i = 0; i < n; ++i) {
    logit_grad(i, labels[static_cast<std::size_t>(i)]) -= 1.0;
  }
  logit_grad /= static_cast<double>(n);

  // Fused-feature gradients combine the cross-entropy pull toward or away
  // from the text rows with the consistency pull toward the references.
  Eigen::MatrixXd grad_fused_vis =
      tau * logit_grad * txt.fused -
      (lambda / static_cast<double>(n)) * frozen_vis;
  Eigen::MatrixXd grad_fused_txt =
      tau * logit_grad.transpose() * vis.fused -
      (lambda / static_cast<double>(c)) * prototypes.prototypes();

  PromptParams grads = PromptParams::zeros(frozen_vis.cols());
  branch_backward(frozen_vis, vis, grad_fused_vis, &grads.vis_map,
                  &grads.vis_bias);
  branch_backward(frozen_txt, txt, grad_fused_txt, &grads.txt_map,
                  &grads.txt_bias);
  return grads;
}

}  // namespace mftb::losses
