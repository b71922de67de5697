#pragma once

#include <vector>

#include <Eigen/Core>

#include "mftb/errors.hpp"

namespace mftb::bounds {

/// Every constant entering the generalization-bound calculus.
struct BoundParams {
  double tau = 1.0;           // softmax temperature, > 0
  long num_classes = 1;       // C >= 1
  long num_samples = 1;       // N >= 1
  long prompt_dim = 1;        // parameter-vector dimension, >= 1
  double param_radius = 1.0;  // radius of the parameter ball, > 0
  double lipschitz = 1.0;     // Lipschitz constant of the difference class
  double confidence = 0.05;   // rho in (0, 1)
  double epsilon = 0.0;       // consistency-loss level of the localized set

  void validate() const;
};

/// Per-class anchor-to-candidate distances and their aggregates:
/// zeta_max = max_c d_c, eps_proj = mean of d_c^2.
struct AnchorStats {
  std::vector<double> per_class_distance;
  double zeta_max = 0.0;
  double eps_proj = 0.0;
};

/// Individual terms of an evaluated bound, for reporting.
struct BoundTerms {
  double loss_bound = 0.0;  // B = log C + 2 tau
  double complexity = 0.0;  // Rademacher / peeling complexity term
  double deviation = 0.0;   // concentration term
  double value = 0.0;       // empirical risk + complexity terms + deviation
  int peeling_depth = -1;   // H, set only in peeling mode
};

/// B = log C + 2 tau, the uniform cross-entropy bound for unit-feature
/// logits.
double loss_bound_B(long num_classes, double tau);

/// 4 tau^2 C l_con, the bound on the mean squared logit perturbation.
double logit_perturbation_bound(double tau, long num_classes, double l_con);

/// (1/N) sum_i ||l_i - l0_i||^2 with l_i,c = tau <fused_vis_i, fused_txt_c>
/// and l0_i,c = tau <frozen_vis_i, w_c>.
double empirical_logit_perturbation(const Eigen::MatrixXd& fused_vis,
                                    const Eigen::MatrixXd& fused_txt,
                                    const Eigen::MatrixXd& frozen_vis,
                                    const Eigen::MatrixXd& prototypes,
                                    double tau);

/// Closed-form localized complexity bound
///   (24 tau / sqrt(N)) * sqrt(2 C eps)
///     * sqrt(D log(3 e Lambda R / (2 tau sqrt(2 C eps)))).
/// Returns 0 for eps = 0 (the localized class collapses to a point). Throws
/// DegenerateRegime when the log argument is <= 1.
double rademacher_bound(const BoundParams& params);

/// empirical_risk + 2 * rademacher_bound + 4 B sqrt(log(4 / rho) / (2 N)).
double generalization_bound(double empirical_risk, const BoundParams& params);
BoundTerms generalization_terms(double empirical_risk,
                                const BoundParams& params);

/// H = ceil(log2 N), the number of dyadic peeling layers minus one.
int peeling_depth(long num_samples);

/// Adaptive bound over the peeled consistency level sets: the complexity
/// term carries sqrt(4 C l_con) and the deviation term log(4 (H+1) / rho).
/// Requires l_con in (0, 1].
double peeling_bound(double empirical_risk, double l_con,
                     const BoundParams& params);
BoundTerms peeling_terms(double empirical_risk, double l_con,
                         const BoundParams& params);

/// Distance from each anchor row to its nearest candidate (ties keep the
/// first index), plus the max and mean-square aggregates.
AnchorStats anchor_stats(const Eigen::MatrixXd& anchors,
                         const std::vector<Eigen::MatrixXd>& candidates);

/// kappa = min over rows of (1 + <frozen_i, prompt_i>). A positive value
/// certifies that every pair in the batch is fusable.
double non_opposition_margins(const Eigen::MatrixXd& frozen,
                              const Eigen::MatrixXd& prompt);

}  // namespace mftb::bounds
