#pragma once

#include <vector>

#include <Eigen/Core>

#include "mftb/errors.hpp"

namespace mftb::drift {

/// Numerical stability constant in the off-manifold ratio denominator.
inline constexpr double kNumericEpsilon = 1e-12;

/// Default principal-subspace rank.
inline constexpr Eigen::Index kDefaultRank = 64;

/// N x d cloud of row features. When `normalized` is set, every row is a
/// unit vector (within 1e-6); the flag travels with the matrix through file
/// I/O and is validated where it is asserted, not on every access.
struct FeatureMatrix {
  Eigen::MatrixXd rows;
  bool normalized = false;

  Eigen::Index count() const { return rows.rows(); }
  Eigen::Index dim() const { return rows.cols(); }

  /// Checks finiteness and, when the flag is set, row norms (1e-6).
  void validate() const;
};

/// Centroid plus a column-orthonormal basis of the leading principal
/// directions of a feature cloud, with the corresponding singular values.
struct PrincipalSubspace {
  Eigen::VectorXd centroid;         // d
  Eigen::MatrixXd basis;            // d x rank, orthonormal columns
  Eigen::VectorXd singular_values;  // rank, non-increasing
  Eigen::Index rank = 0;

  Eigen::Index dim() const { return centroid.size(); }
};

/// Off-manifold energy ratios of the two clouds and their difference.
struct DriftReport {
  double ratio_pretrained = 0.0;
  double ratio_tuned = 0.0;
  double delta = 0.0;
  Eigen::Index rank = 0;
  Eigen::Index n_samples = 0;
};

/// Fits the principal subspace of Z: centroid is the row mean, basis columns
/// are the top-rank right singular vectors of the centered matrix, sorted by
/// singular value descending (stable under ties) with each column's
/// largest-magnitude entry made positive.
///
/// Throws RankTooLarge when rank is outside [1, min(N-1, d)] and
/// DegenerateCloud when the centered matrix is numerically zero.
PrincipalSubspace fit_subspace(const FeatureMatrix& cloud, Eigen::Index rank);

/// sum_i ||(I - P)(x_i - mu)||^2 / (sum_i ||x_i - mu||^2 + eps_num), the
/// fraction of centered energy orthogonal to the subspace. In [0, 1].
double off_manifold_ratio(const FeatureMatrix& cloud,
                          const PrincipalSubspace& subspace);

/// Fits the subspace on the pretrained cloud, centers both clouds by the
/// pretrained centroid, and returns delta = ratio(tuned) - ratio(pretrained).
DriftReport manifold_drift(const FeatureMatrix& pretrained,
                           const FeatureMatrix& tuned, Eigen::Index rank);

/// One DriftReport per requested rank, each subspace refit independently.
/// An invalid rank is reported with its value and position.
std::vector<DriftReport> drift_sensitivity(const FeatureMatrix& pretrained,
                                           const FeatureMatrix& tuned,
                                           const std::vector<Eigen::Index>& ranks);

struct ShiftDecomposition {
  Eigen::VectorXd in_subspace;  // B B^T delta
  Eigen::VectorXd complement;   // delta - in_subspace
};

/// Splits a feature-shift vector into its component inside the span of the
/// given column-orthonormal basis and the orthogonal remainder.
ShiftDecomposition decompose_shift(const Eigen::VectorXd& delta,
                                   const Eigen::MatrixXd& basis);

}  // namespace mftb::drift
