#include "mftb/sphere.hpp"

#include <algorithm>
#include <cmath>

namespace mftb::sphere {

namespace {

void require_same_dim(const UnitVector& u, const UnitVector& v) {
  if (u.dim() != v.dim()) {
    throw DimensionMismatch("unit vectors have dimensions " +
                            std::to_string(u.dim()) + " and " +
                            std::to_string(v.dim()));
  }
}

}  // namespace

UnitVector::UnitVector(Eigen::VectorXd components)
    : components_(std::move(components)) {
  if (components_.size() < 2) {
    throw DimensionMismatch("unit vector needs dimension >= 2, got " +
                            std::to_string(components_.size()));
  }
  if (!components_.allFinite()) {
    throw InvalidArgument("unit vector has non-finite entries");
  }
  double norm = components_.norm();
  if (std::abs(norm - 1.0) > kUnitTolerance) {
    throw NotNormalized("vector norm " + std::to_string(norm) +
                        " is not unit within tolerance");
  }
}

UnitVector normalize(const Eigen::VectorXd& v, double zero_threshold) {
  if (!v.allFinite()) {
    throw InvalidArgument("normalize: input has non-finite entries");
  }
  double norm = v.norm();
  if (norm <= zero_threshold) {
    throw ZeroNorm("normalize: norm " + std::to_string(norm) +
                   " at or below threshold " + std::to_string(zero_threshold));
  }
  return UnitVector(v / norm);
}

double cosine(const UnitVector& u, const UnitVector& v) {
  require_same_dim(u, v);
  double dot = u.vec().dot(v.vec());
  return std::clamp(dot, -1.0, 1.0);
}

double sphere_distance_sq(const UnitVector& u, const UnitVector& v) {
  require_same_dim(u, v);
  double value = 2.0 * (1.0 - u.vec().dot(v.vec()));
  return std::clamp(value, 0.0, 4.0);
}

UnitVector fuse(const FusionInput& input, double kappa) {
  return fuse(input.frozen, input.prompt, kappa);
}

UnitVector fuse(const UnitVector& frozen, const UnitVector& prompt,
                double kappa) {
  require_same_dim(frozen, prompt);
  Eigen::VectorXd sum = frozen.vec() + prompt.vec();
  double norm_sq = sum.squaredNorm();
  if (norm_sq < 2.0 * kappa) {
    throw NearOpposition("fuse: ||frozen + prompt||^2 = " +
                         std::to_string(norm_sq) + " below margin 2*kappa = " +
                         std::to_string(2.0 * kappa));
  }
  return UnitVector(sum / std::sqrt(norm_sq));
}

double contraction_gap(const FusionInput& input, double kappa) {
  UnitVector fused = fuse(input, kappa);
  double prompt_gap = (input.prompt.vec() - input.frozen.vec()).squaredNorm();
  double fused_gap = (fused.vec() - input.frozen.vec()).squaredNorm();
  return 0.5 * prompt_gap - fused_gap;
}

LipschitzCheck fusion_lipschitz_check(const UnitVector& frozen,
                                      const UnitVector& prompt_a,
                                      const UnitVector& prompt_b,
                                      double upsilon) {
  require_same_dim(frozen, prompt_a);
  require_same_dim(frozen, prompt_b);
  if (upsilon <= 0.0) {
    throw InvalidArgument("fusion_lipschitz_check: upsilon must be positive");
  }
  Eigen::VectorXd sum_a = frozen.vec() + prompt_a.vec();
  Eigen::VectorXd sum_b = frozen.vec() + prompt_b.vec();
  double norm_a = sum_a.norm();
  double norm_b = sum_b.norm();
  if (norm_a < upsilon || norm_b < upsilon) {
    throw MarginViolation(
        "fusion_lipschitz_check: fused norm " +
        std::to_string(std::min(norm_a, norm_b)) + " below upsilon " +
        std::to_string(upsilon));
  }
  LipschitzCheck result;
  result.lhs = (sum_a / norm_a - sum_b / norm_b).norm();
  result.bound = (2.0 / upsilon) * (prompt_a.vec() - prompt_b.vec()).norm();
  return result;
}

}  // namespace mftb::sphere
