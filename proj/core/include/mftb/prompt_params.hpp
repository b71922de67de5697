#pragma once

#include <Eigen/Core>

namespace mftb {

/// Learnable parameters of the affine prompt branch: one perturbation map and
/// bias per modality. The prompt feature for a frozen feature z is
/// normalize(z + map * z + bias). The same structure doubles as the gradient
/// container returned by the loss backward pass.
struct PromptParams {
  Eigen::MatrixXd vis_map;   // d x d
  Eigen::VectorXd vis_bias;  // d
  Eigen::MatrixXd txt_map;   // d x d
  Eigen::VectorXd txt_bias;  // d

  static PromptParams zeros(Eigen::Index dim) {
    PromptParams p;
    p.vis_map = Eigen::MatrixXd::Zero(dim, dim);
    p.vis_bias = Eigen::VectorXd::Zero(dim);
    p.txt_map = Eigen::MatrixXd::Zero(dim, dim);
    p.txt_bias = Eigen::VectorXd::Zero(dim);
    return p;
  }

  Eigen::Index dim() const { return vis_bias.size(); }

  bool all_finite() const {
    return vis_map.allFinite() && vis_bias.allFinite() &&
           txt_map.allFinite() && txt_bias.allFinite();
  }

  /// this += scale * other, entrywise.
  void axpy(double scale, const PromptParams& other) {
    vis_map += scale * other.vis_map;
    vis_bias += scale * other.vis_bias;
    txt_map += scale * other.txt_map;
    txt_bias += scale * other.txt_bias;
  }
};

}  // namespace mftb
