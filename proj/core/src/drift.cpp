#include "mftb/drift.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <Eigen/Dense>

namespace mftb::drift {

namespace {

constexpr double kRowUnitTolerance = 1e-6;
constexpr double kDegenerateFrobenius = 1e-12;

// Fixes the sign of each basis column so its largest-magnitude entry is
// positive; among equal magnitudes the lowest index decides.
void fix_column_signs(Eigen::MatrixXd* basis) {
  for (Eigen::Index j = 0; j < basis->cols(); ++j) {
    Eigen::Index lead = 0;
    double best = -1.0;
    for (Eigen::Index i = 0; i < basis->rows(); ++i) {
      double mag = std::abs((*basis)(i, j));
      if (mag > best) {
        best = mag;
        lead = i;
      }
    }
    if ((*basis)(lead, j) < 0.0) {
      basis->col(j) = -basis->col(j);
    }
  }
}

// Sorts (singular value, column) pairs by value descending; equal values
// keep their incoming order.
void sort_descending(Eigen::VectorXd* values, Eigen::MatrixXd* vectors) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(values->size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) {
                     return (*values)(a) > (*values)(b);
                   });
  Eigen::VectorXd sorted_values(values->size());
  Eigen::MatrixXd sorted_vectors(vectors->rows(), vectors->cols());
  for (Eigen::Index k = 0; k < values->size(); ++k) {
    sorted_values(k) = (*values)(order[static_cast<std::size_t>(k)]);
    sorted_vectors.col(k) = vectors->col(order[static_cast<std::size_t>(k)]);
  }
  *values = std::move(sorted_values);
  *vectors = std::move(sorted_vectors);
}

}  // namespace

void FeatureMatrix::validate() const {
  if (!rows.allFinite()) {
    throw InvalidArgument("feature matrix has non-finite entries");
  }
  if (normalized) {
    for (Eigen::Index i = 0; i < rows.rows(); ++i) {
      double norm = rows.row(i).norm();
      if (std::abs(norm - 1.0) > kRowUnitTolerance) {
        throw NotNormalized("row " + std::to_string(i) + " has norm " +
                            std::to_string(norm));
      }
    }
  }
}

PrincipalSubspace fit_subspace(const FeatureMatrix& cloud, Eigen::Index rank) {
  const Eigen::Index n = cloud.count();
  const Eigen::Index d = cloud.dim();
  if (n < 1 || d < 2) {
    throw InvalidArgument("fit_subspace: cloud must be at least 1 x 2");
  }
  if (!cloud.rows.allFinite()) {
    throw InvalidArgument("fit_subspace: non-finite entries");
  }
  const Eigen::Index max_rank = n > 1 ? std::min<Eigen::Index>(n - 1, d) : 0;
  if (rank < 1 || rank > max_rank) {
    throw RankTooLarge("fit_subspace: rank " + std::to_string(rank) +
                       " outside [1, " + std::to_string(max_rank) +
                       "] for a " + std::to_string(n) + "x" +
                       std::to_string(d) + " cloud");
  }

  Eigen::VectorXd centroid = cloud.rows.colwise().mean().transpose();
  Eigen::MatrixXd centered = cloud.rows.rowwise() - centroid.transpose();
  if (centered.norm() <= kDegenerateFrobenius) {
    throw DegenerateCloud("fit_subspace: centered cloud is numerically zero");
  }

  // The right singular vectors come from the smaller Gram matrix: d x d when
  // N >= d, otherwise N x N with v_k = centered^T u_k / sigma_k. A rank
  // deficit on the small side falls back to the d x d path, whose
  // eigendecomposition always yields an orthonormal basis.
  Eigen::VectorXd singular_values;
  Eigen::MatrixXd right_vectors;
  bool need_dense_fallback = false;
  if (n < d) {
    Eigen::MatrixXd gram = centered * centered.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram);
    if (solver.info() != Eigen::Success) {
      throw InvalidArgument("fit_subspace: eigendecomposition failed");
    }
    // Ascending eigenvalues; walk from the back.
    singular_values.resize(rank);
    right_vectors.resize(d, rank);
    Eigen::VectorXd eigenvalues = solver.eigenvalues();
    Eigen::MatrixXd left = solver.eigenvectors();
    for (Eigen::Index k = 0; k < rank; ++k) {
      double ev = std::max(eigenvalues(n - 1 - k), 0.0);
      double sv = std::sqrt(ev);
      if (sv <= 1e-12) {
        need_dense_fallback = true;
        break;
      }
      singular_values(k) = sv;
      right_vectors.col(k) = centered.transpose() * left.col(n - 1 - k) / sv;
    }
  }
  if (n >= d || need_dense_fallback) {
    Eigen::MatrixXd gram = centered.transpose() * centered;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram);
    if (solver.info() != Eigen::Success) {
      throw InvalidArgument("fit_subspace: eigendecomposition failed");
    }
    Eigen::VectorXd eigenvalues =
        solver.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    Eigen::MatrixXd vectors = solver.eigenvectors();
    sort_descending(&eigenvalues, &vectors);
    singular_values = eigenvalues.head(rank);
    right_vectors = vectors.leftCols(rank);
  }

  sort_descending(&singular_values, &right_vectors);
  fix_column_signs(&right_vectors);

  PrincipalSubspace subspace;
  subspace.centroid = std::move(centroid);
  subspace.basis = std::move(right_vectors);
  subspace.singular_values = std::move(singular_values);
  subspace.rank = rank;
  return subspace;
}

double off_manifold_ratio(const FeatureMatrix& cloud,
                          const PrincipalSubspace& subspace) {
  if (cloud.dim() != subspace.dim()) {
    throw DimensionMismatch("off_manifold_ratio: cloud dim " +
                            std::to_string(cloud.dim()) + " vs subspace dim " +
                            std::to_string(subspace.dim()));
  }
  // Factored projection: ||(I - V V^T) x||^2 = ||x||^2 - ||V^T x||^2, so the
  // d x d projector is never materialized.
  Eigen::MatrixXd centered =
      cloud.rows.rowwise() - subspace.centroid.transpose();
  double total = 0.0;
  double outside = 0.0;
  for (Eigen::Index i = 0; i < centered.rows(); ++i) {
    double row_sq = centered.row(i).squaredNorm();
    double inside_sq = (subspace.basis.transpose() *
                        centered.row(i).transpose()).squaredNorm();
    total += row_sq;
    outside += std::max(row_sq - inside_sq, 0.0);
  }
  double ratio = outside / (total + kNumericEpsilon);
  return std::clamp(ratio, 0.0, 1.0);
}

DriftReport manifold_drift(const FeatureMatrix& pretrained,
                           const FeatureMatrix& tuned, Eigen::Index rank) {
  if (pretrained.count() != tuned.count() ||
      pretrained.dim() != tuned.dim()) {
    throw ShapeMismatch("manifold_drift: clouds are " +
                        std::to_string(pretrained.count()) + "x" +
                        std::to_string(pretrained.dim()) + " and " +
                        std::to_string(tuned.count()) + "x" +
                        std::to_string(tuned.dim()));
  }
  PrincipalSubspace subspace = fit_subspace(pretrained, rank);
  DriftReport report;
  report.ratio_pretrained = off_manifold_ratio(pretrained, subspace);
  report.ratio_tuned = off_manifold_ratio(tuned, subspace);
  report.delta = report.ratio_tuned - report.ratio_pretrained;
  report.rank = rank;
  report.n_samples = pretrained.count();
  return report;
}

std::vector<DriftReport> drift_sensitivity(
    const FeatureMatrix& pretrained, const FeatureMatrix& tuned,
    const std::vector<Eigen::Index>& ranks) {
  // Validate the whole grid first so a bad rank is reported before any work.
  const Eigen::Index max_rank =
      pretrained.count() > 1
          ? std::min<Eigen::Index>(pretrained.count() - 1, pretrained.dim())
          : 0;
  for (std::size_t k = 0; k < ranks.size(); ++k) {
    if (ranks[k] < 1 || ranks[k] > max_rank) {
      throw RankTooLarge("drift_sensitivity: rank " +
                         std::to_string(ranks[k]) + " at position " +
                         std::to_string(k) + " outside [1, " +
                         std::to_string(max_rank) + "]");
    }
  }
  std::vector<DriftReport> reports;
  reports.reserve(ranks.size());
  for (Eigen::Index rank : ranks) {
    reports.push_back(manifold_drift(pretrained, tuned, rank));
  }
  return reports;
}

ShiftDecomposition decompose_shift(const Eigen::VectorXd& delta,
                                   const Eigen::MatrixXd& basis) {
  if (basis.rows() != delta.size()) {
    throw DimensionMismatch("decompose_shift: delta dim " +
                            std::to_string(delta.size()) + " vs basis rows " +
                            std::to_string(basis.rows()));
  }
  Eigen::MatrixXd gram = basis.transpose() * basis;
  double deviation =
      (gram - Eigen::MatrixXd::Identity(basis.cols(), basis.cols()))
          .cwiseAbs()
          .maxCoeff();
  if (deviation > 1e-8) {
    throw NonOrthonormalBasis(
        "decompose_shift: basis deviates from orthonormality by " +
        std::to_string(deviation));
  }
  ShiftDecomposition parts;
  parts.in_subspace = basis * (basis.transpose() * delta);
  parts.complement = delta - parts.in_subspace;
  return parts;
}

}  // namespace mftb::drift
