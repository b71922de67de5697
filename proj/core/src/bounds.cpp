#include "mftb/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mftb::bounds {

namespace {

constexpr double kEulerE = 2.718281828459045235360287471353;

void require_shape(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                   const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeMismatch(std::string(what) + ": " + std::to_string(a.rows()) +
                        "x" + std::to_string(a.cols()) + " vs " +
                        std::to_string(b.rows()) + "x" +
                        std::to_string(b.cols()));
  }
}

// Complexity term shared by the fixed and peeling bounds: the level scale
// chi enters as (12 chi / sqrt(N)) * sqrt(D log(3 e Lambda R / chi)).
double dudley_complexity(double chi, const BoundParams& p,
                         const char* context) {
  double log_argument = 3.0 * kEulerE * p.lipschitz * p.param_radius / chi;
  if (log_argument <= 1.0) {
    throw DegenerateRegime(std::string(context) +
                           ": log argument " + std::to_string(log_argument) +
                           " <= 1, the covering bound does not apply");
  }
  return 12.0 * chi / std::sqrt(static_cast<double>(p.num_samples)) *
         std::sqrt(static_cast<double>(p.prompt_dim) *
                   std::log(log_argument));
}

}  // namespace

void BoundParams::validate() const {
  if (tau <= 0.0) {
    throw InvalidArgument("bound params: tau must be positive");
  }
  if (num_classes < 1) {
    throw InvalidArgument("bound params: num_classes must be >= 1");
  }
  if (num_samples < 1) {
    throw InvalidArgument("bound params: num_samples must be >= 1");
  }
  if (prompt_dim < 1) {
    throw InvalidArgument("bound params: prompt_dim must be >= 1");
  }
  if (param_radius <= 0.0) {
    throw InvalidArgument("bound params: param_radius must be positive");
  }
  if (lipschitz <= 0.0) {
    throw InvalidArgument("bound params: lipschitz must be positive");
  }
  if (confidence <= 0.0 || confidence >= 1.0) {
    throw InvalidArgument("bound params: confidence must be in (0, 1)");
  }
  if (epsilon < 0.0) {
    throw InvalidArgument("bound params: epsilon must be non-negative");
  }
}

double loss_bound_B(long num_classes, double tau) {
  if (num_classes < 1) {
    throw InvalidArgument("loss_bound_B: num_classes must be >= 1");
  }
  if (tau <= 0.0) {
    throw InvalidArgument("loss_bound_B: tau must be positive");
  }
  return std::log(static_cast<double>(num_classes)) + 2.0 * tau;
}

double logit_perturbation_bound(double tau, long num_classes, double l_con) {
  if (tau <= 0.0) {
    throw InvalidArgument("logit_perturbation_bound: tau must be positive");
  }
  if (num_classes < 1) {
    throw InvalidArgument("logit_perturbation_bound: num_classes must be >= 1");
  }
  if (l_con < 0.0) {
    throw InvalidArgument(
        "logit_perturbation_bound: l_con must be non-negative");
  }
  return 4.0 * tau * tau * static_cast<double>(num_classes) * l_con;
}

double empirical_logit_perturbation(const Eigen::MatrixXd& fused_vis,
                                    const Eigen::MatrixXd& fused_txt,
                                    const Eigen::MatrixXd& frozen_vis,
                                    const Eigen::MatrixXd& prototypes,
                                    double tau) {
  require_shape(fused_vis, frozen_vis, "visual clouds");
  require_shape(fused_txt, prototypes, "text clouds");
  if (fused_vis.cols() != fused_txt.cols()) {
    throw ShapeMismatch("visual dim " + std::to_string(fused_vis.cols()) +
                        " vs text dim " + std::to_string(fused_txt.cols()));
  }
  if (fused_vis.rows() == 0) {
    throw ShapeMismatch("empirical_logit_perturbation: empty batch");
  }
  Eigen::MatrixXd adapted = tau * fused_vis * fused_txt.transpose();
  Eigen::MatrixXd reference = tau * frozen_vis * prototypes.transpose();
  return (adapted - reference).squaredNorm() /
         static_cast<double>(fused_vis.rows());
}

double rademacher_bound(const BoundParams& params) {
  params.validate();
  // The localized class collapses to the single reference function at
  // eps = 0; the bound is 0 by convention there.
  if (params.epsilon == 0.0) {
    return 0.0;
  }
  double chi = 2.0 * params.tau *
               std::sqrt(2.0 * static_cast<double>(params.num_classes) *
                         params.epsilon);
  return dudley_complexity(chi, params, "rademacher_bound");
}

BoundTerms generalization_terms(double empirical_risk,
                                const BoundParams& params) {
  if (empirical_risk < 0.0) {
    throw InvalidArgument("generalization bound: empirical risk must be >= 0");
  }
  params.validate();
  BoundTerms terms;
  terms.loss_bound = loss_bound_B(params.num_classes, params.tau);
  terms.complexity = 2.0 * rademacher_bound(params);
  terms.deviation =
      4.0 * terms.loss_bound *
      std::sqrt(std::log(4.0 / params.confidence) /
                (2.0 * static_cast<double>(params.num_samples)));
  terms.value = empirical_risk + terms.complexity + terms.deviation;
  return terms;
}

double generalization_bound(double empirical_risk, const BoundParams& params) {
  return generalization_terms(empirical_risk, params).value;
}

int peeling_depth(long num_samples) {
  if (num_samples < 1) {
    throw InvalidArgument("peeling_depth: num_samples must be >= 1");
  }
  int depth = 0;
  while ((1L << depth) < num_samples) {
    ++depth;
  }
  return depth;
}

BoundTerms peeling_terms(double empirical_risk, double l_con,
                         const BoundParams& params) {
  if (empirical_risk < 0.0) {
    throw InvalidArgument("peeling bound: empirical risk must be >= 0");
  }
  if (l_con <= 0.0 || l_con > 1.0) {
    throw LConOutOfRange("peeling bound: l_con " + std::to_string(l_con) +
                         " outside (0, 1]");
  }
  params.validate();
  BoundTerms terms;
  terms.peeling_depth = peeling_depth(params.num_samples);
  terms.loss_bound = loss_bound_B(params.num_classes, params.tau);
  double chi = 2.0 * params.tau *
               std::sqrt(4.0 * static_cast<double>(params.num_classes) *
                         l_con);
  // The dyadic layer containing l_con has level at most 2 l_con, which is
  // what the sqrt(4 C l_con) scale encodes.
  terms.complexity = dudley_complexity(chi, params, "peeling_bound");
  terms.deviation =
      4.0 * terms.loss_bound *
      std::sqrt(std::log(4.0 * (terms.peeling_depth + 1) / params.confidence) /
                (2.0 * static_cast<double>(params.num_samples)));
  terms.value = empirical_risk + terms.complexity + terms.deviation;
  return terms;
}

double peeling_bound(double empirical_risk, double l_con,
                     const BoundParams& params) {
  return peeling_terms(empirical_risk, l_con, params).value;
}

AnchorStats anchor_stats(const Eigen::MatrixXd& anchors,
                         const std::vector<Eigen::MatrixXd>& candidates) {
  if (anchors.rows() == 0) {
    throw EmptyClass("anchor_stats: no anchors");
  }
  if (static_cast<Eigen::Index>(candidates.size()) != anchors.rows()) {
    throw ShapeMismatch("anchor_stats: " + std::to_string(anchors.rows()) +
                        " anchors vs " + std::to_string(candidates.size()) +
                        " candidate sets");
  }
  AnchorStats stats;
  stats.per_class_distance.reserve(candidates.size());
  double square_sum = 0.0;
  for (Eigen::Index c = 0; c < anchors.rows(); ++c) {
    const Eigen::MatrixXd& set = candidates[static_cast<std::size_t>(c)];
    if (set.rows() == 0) {
      throw EmptyClass("anchor_stats: class " + std::to_string(c) +
                       " has no candidates");
    }
    if (set.cols() != anchors.cols()) {
      throw ShapeMismatch("anchor_stats: class " + std::to_string(c) +
                          " candidate dim " + std::to_string(set.cols()) +
                          " vs anchor dim " + std::to_string(anchors.cols()));
    }
    double best = (set.row(0) - anchors.row(c)).norm();
    for (Eigen::Index j = 1; j < set.rows(); ++j) {
      double dist = (set.row(j) - anchors.row(c)).norm();
      if (dist < best) {  // strict: ties keep the first index
        best = dist;
      }
    }
    stats.per_class_distance.push_back(best);
    stats.zeta_max = std::max(stats.zeta_max, best);
    square_sum += best * best;
  }
  stats.eps_proj = square_sum / static_cast<double>(anchors.rows());
  return stats;
}

double non_opposition_margins(const Eigen::MatrixXd& frozen,
                              const Eigen::MatrixXd& prompt) {
  require_shape(frozen, prompt, "non_opposition_margins");
  if (frozen.rows() == 0) {
    throw ShapeMismatch("non_opposition_margins: empty batch");
  }
  double margin = 2.0;
  for (Eigen::Index i = 0; i < frozen.rows(); ++i) {
    margin = std::min(margin, 1.0 + frozen.row(i).dot(prompt.row(i)));
  }
  return std::clamp(margin, 0.0, 2.0);
}

}  // namespace mftb::bounds
