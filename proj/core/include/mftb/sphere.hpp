#pragma once

#include <Eigen/Core>

#include "mftb/errors.hpp"

namespace mftb::sphere {

/// Norms below this are treated as zero when normalizing.
inline constexpr double kZeroNormThreshold = 1e-12;

/// Non-near-opposition margin kappa. Fusing u and v requires
/// ||u + v||^2 >= 2*kappa, i.e. <u, v> >= -1 + kappa.
inline constexpr double kOppositionMargin = 1e-6;

/// Construction tolerance on |  ||v||_2 - 1 |.
inline constexpr double kUnitTolerance = 1e-9;

/// A vector on the unit sphere S^{d-1}, d >= 2. Immutable once built.
class UnitVector {
public:
  /// Validates the unit-norm invariant (within kUnitTolerance) and finiteness.
  explicit UnitVector(Eigen::VectorXd components);

  const Eigen::VectorXd& vec() const { return components_; }
  Eigen::Index dim() const { return components_.size(); }

private:
  Eigen::VectorXd components_;
};

/// A frozen reference feature paired with a prompt-branch feature of the
/// same dimension, the two inputs of the fusion map.
struct FusionInput {
  UnitVector frozen;
  UnitVector prompt;
};

/// v / ||v||_2. Throws ZeroNorm when ||v||_2 <= zero_threshold.
UnitVector normalize(const Eigen::VectorXd& v,
                     double zero_threshold = kZeroNormThreshold);

/// <u, v>, clamped to [-1, 1] so downstream arccos-style uses never see an
/// out-of-range value.
double cosine(const UnitVector& u, const UnitVector& v);

/// 2 * (1 - <u, v>), which equals ||u - v||^2 for unit vectors. In [0, 4].
double sphere_distance_sq(const UnitVector& u, const UnitVector& v);

/// (frozen + prompt) / ||frozen + prompt||. Throws NearOpposition when
/// ||frozen + prompt||^2 < 2*kappa.
UnitVector fuse(const FusionInput& input, double kappa = kOppositionMargin);
UnitVector fuse(const UnitVector& frozen, const UnitVector& prompt,
                double kappa = kOppositionMargin);

/// 0.5 * ||prompt - frozen||^2 - ||fuse(input) - frozen||^2.
///
/// The fusion map contracts toward the frozen feature, so this gap is
/// non-negative (up to rounding) for every admissible input.
double contraction_gap(const FusionInput& input,
                       double kappa = kOppositionMargin);

struct LipschitzCheck {
  double lhs;    // ||fuse(frozen, a) - fuse(frozen, b)||
  double bound;  // (2 / upsilon) * ||a - b||
};

/// Evaluates both sides of the fusion Lipschitz inequality. Throws
/// MarginViolation if either ||frozen + prompt|| falls below upsilon.
LipschitzCheck fusion_lipschitz_check(const UnitVector& frozen,
                                      const UnitVector& prompt_a,
                                      const UnitVector& prompt_b,
                                      double upsilon);

}  // namespace mftb::sphere
