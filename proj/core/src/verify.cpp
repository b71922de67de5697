#include "mftb/verify.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "mftb/bounds.hpp"
#include "mftb/drift.hpp"
#include "mftb/losses.hpp"
#include "mftb/rng.hpp"

namespace mftb::verify {

namespace {

constexpr std::uint64_t kTrialStream = 0x5eedf00d;

Eigen::VectorXd gaussian(CounterRng& rng, Eigen::Index dim) {
  Eigen::VectorXd v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    v(i) = rng.next_normal();
  }
  return v;
}

sphere::UnitVector random_unit(CounterRng& rng, Eigen::Index dim) {
  while (true) {
    Eigen::VectorXd v = gaussian(rng, dim);
    if (v.norm() > 1e-6) {
      return sphere::normalize(v);
    }
  }
}

Eigen::MatrixXd random_unit_rows(CounterRng& rng, Eigen::Index n,
                                 Eigen::Index dim) {
  Eigen::MatrixXd rows(n, dim);
  for (Eigen::Index i = 0; i < n; ++i) {
    rows.row(i) = random_unit(rng, dim).vec().transpose();
  }
  return rows;
}

// Runs `body` once per trial with a trial-specific reproducing seed and tags
// the result with that seed on the first failure. The body returns an empty
// string on success or a failure description.
PropertyResult run_property(
    const std::string& name, const Options& options,
    const std::function<std::string(std::uint64_t trial_seed)>& body) {
  PropertyResult result;
  result.name = name;
  result.trials = options.trials;
  for (long long t = 0; t < options.trials; ++t) {
    std::uint64_t trial_seed = CounterRng::mix(
        options.seed ^ CounterRng::mix(static_cast<std::uint64_t>(t) +
                                       kTrialStream));
    std::string failure = body(trial_seed);
    if (!failure.empty()) {
      if (result.failures == 0) {
        result.first_failure_seed = trial_seed;
        result.detail = failure;
      }
      ++result.failures;
    }
  }
  return result;
}

Eigen::Index cycle_dim(std::uint64_t trial_seed) {
  static constexpr Eigen::Index kDims[] = {2, 8, 64, 512};
  return kDims[trial_seed % 4];
}

FuseFn effective_fuse(const Options& options) {
  if (options.fuse_override) {
    return options.fuse_override;
  }
  return [](const sphere::UnitVector& a, const sphere::UnitVector& b) {
    return sphere::fuse(a, b);
  };
}

// --- sphere suite ---

std::vector<PropertyResult> sphere_suite(const Options& options) {
  FuseFn do_fuse = effective_fuse(options);
  std::vector<PropertyResult> results;

  results.push_back(run_property(
      "sphere/contraction-gap", options, [&](std::uint64_t trial_seed) {
        CounterRng rng(trial_seed, 1);
        Eigen::Index dim = cycle_dim(trial_seed);
        sphere::UnitVector frozen = random_unit(rng, dim);
        sphere::UnitVector prompt = random_unit(rng, dim);
        double gamma = sphere::cosine(frozen, prompt);
        if (gamma <= -0.999) {
          return std::string();  // outside the sampled regime
        }
        sphere::UnitVector fused = do_fuse(frozen, prompt);
        double gap =
            0.5 * (prompt.vec() - frozen.vec()).squaredNorm() -
            (fused.vec() - frozen.vec()).squaredNorm();
        if (gap < -1e-12) {
          return "gap " + std::to_string(gap) + " below -1e-12";
        }
        return std::string();
      }));

  results.push_back(run_property(
      "sphere/fusion-alignment", options, [&](std::uint64_t trial_seed) {
        CounterRng rng(trial_seed, 2);
        Eigen::Index dim = cycle_dim(trial_seed);
        sphere::UnitVector frozen = random_unit(rng, dim);
        sphere::UnitVector prompt = random_unit(rng, dim);
        double gamma = sphere::cosine(frozen, prompt);
        if (gamma <= -0.999) {
          return std::string();
        }
        double actual = sphere::cosine(do_fuse(frozen, prompt), frozen);
        double expected = std::sqrt((1.0 + gamma) / 2.0);
        if (std::abs(actual - expected) > 1e-10) {
          return "alignment " + std::to_string(actual) + " vs closed form " +
                 std::to_string(expected);
        }
        return std::string();
      }));

  results.push_back(run_property(
      "sphere/identity", options, [&](std::uint64_t trial_seed) {
        CounterRng rng(trial_seed, 3);
        Eigen::Index dim = cycle_dim(trial_seed);
        sphere::UnitVector u = random_unit(rng, dim);
        sphere::UnitVector v = random_unit(rng, dim);
        double via_identity = sphere::sphere_distance_sq(u, v);
        double explicit_sq = (u.vec() - v.vec()).squaredNorm();
        if (std::abs(via_identity - explicit_sq) > 1e-12) {
          return "identity deviation " +
                 std::to_string(via_identity - explicit_sq);
        }
        return std::string();
      }));

  results.push_back(run_property(
      "sphere/fusion-fixed-point", options, [&](std::uint64_t trial_seed) {
        CounterRng rng(trial_seed, 4);
        Eigen::Index dim = cycle_dim(trial_seed);
        sphere::UnitVector v = random_unit(rng, dim);
        Eigen::VectorXd diff = do_fuse(v, v).vec() - v.vec();
        if (diff.cwiseAbs().maxCoeff() > 1e-12) {
          return "fixed point deviation " +
                 std::to_string(diff.cwiseAbs().maxCoeff());
        }
        return std::string();
      }));

  results.push_back(run_property(
      "sphere/fusion-symmetry", options, [&](std::uint64_t trial_seed) {
        CounterRng rng(trial_seed, 5);
        Eigen::Index dim = cycle_dim(trial_seed);
        sphere::UnitVector a = random_unit(rng, dim);
        sphere::UnitVector b = random_unit(rng, dim);
        if (sphere::cosine(a, b) <= -0.999) {
          return std::string();
        }
        Eigen::VectorXd diff = do_fuse(a, b).vec() - do_fuse(b, a).vec();
        if (diff.cwiseAbs().maxCoeff() > 1e-15) {
          return "asymmetry " + std::to_string(diff.cwiseAbs().maxCoeff());
        }
        return std::string();
      }));

  results.push_back(run_property(
      "sphere/fusion-lipschitz", options, [&](std::uint64_t trial_seed) {
        CounterRng rng(trial_seed, 6);
        Eigen::Index dim = cycle_dim(trial_seed);
        sphere::UnitVector frozen = random_unit(rng, dim);
        sphere::UnitVector prompt_a = random_unit(rng, dim);
        sphere::UnitVector prompt_b = random_unit(rng, dim);
        double norm_a = (frozen.vec() + prompt_a.vec()).norm();
        double norm_b = (frozen.vec() + prompt_b.vec()).norm();
        double upsilon = std::min(norm_a, norm_b);
        if (upsilon < 1e-3) {
          return std::string();  // near-opposition pairs are excluded
        }
        sphere::LipschitzCheck check =
            sphere::fusion_lipschitz_check(frozen, prompt_a, prompt_b,
                                           upsilon);
        if (check.lhs > check.bound + 1e-12) {
          return "lhs " + std::to_string(check.lhs) + " above bound " +
                 std::to_string(check.bound);
        }
        return std::string();
      }));

  return results;
}

// --- drift suite ---

std::vector<PropertyResult> drift_suite(const Options& rough_options) {
  // Subspace fits are much heavier than sphere trials; scale the count down
  // while keeping at least a handful.
  Options options = rough_options;
  options.trials = std::max<long long>(rough_options.trials / 100, 8);

  std::vector<PropertyResult> results;

  results.push_back(run_property(
      "drift/pythagoras", options, [&](std::uint64_t trial_seed) {
        CounterRng rng(trial_seed, 11);
        Eigen::Index n = 20 + static_cast<Eigen::Index>(rng.next_below(30));
        Eigen::Index d = 8 + static_cast<Eigen::Index>(rng.next_below(24));
        drift::FeatureMatrix cloud{random_unit_rows(rng, n, d), true};
        Eigen::Index rank = 1 + static_cast<Eigen::Index>(rng.next_below(
            static_cast<std::uint64_t>(std::min(n - 1, d))));
        drift::PrincipalSubspace sub = drift::fit_subspace(cloud, rank);
        for (Eigen::Index i = 0; i < n; ++i) {
          Eigen::VectorXd centered =
              cloud.rows.row(i).transpose() - sub.centroid;
          double inside = (sub.basis.transpose() * centered).squaredNorm();
          double outside =
              (centered - sub.basis * (sub.basis.transpose() * centered))
                  .squaredNorm();
          if (std::abs(inside + outside - centered.squaredNorm()) > 1e-9) {
            return "row " + std::to_string(i) + " violates Pythagoras";
          }
        }
        return std::string();
      }));

  results.push_back(run_property(
      "drift/tail-energy", options, [&](std::uint64_t trial_seed) {
        CounterRng rng(trial_seed, 12);
        Eigen::Index n = 30 + static_cast<Eigen::Index>(rng.next_below(30));
        Eigen::Index d = 6 + static_cast<Eigen::Index>(rng.next_below(10));
        drift::FeatureMatrix cloud{random_unit_rows(rng, n, d), true};
        Eigen::Index rank = 1 + static_cast<Eigen::Index>(rng.next_below(
            static_cast<std::uint64_t>(std::min(n - 1, d))));
        drift::PrincipalSubspace sub = drift::fit_subspace(cloud, rank);
        double ratio = drift::off_manifold_ratio(cloud, sub);
        // Independent spectrum from a full SVD of the centered cloud.
        Eigen::MatrixXd centered =
            cloud.rows.rowwise() - cloud.rows.colwise().mean();
        Eigen::VectorXd spectrum =
            Eigen::JacobiSVD<Eigen::MatrixXd>(centered).singularValues();
        double total = spectrum.squaredNorm();
        double tail =
            spectrum.size() > rank
                ? spectrum.tail(spectrum.size() - rank).squaredNorm()
                : 0.0;
        double expected = tail / (total + drift::kNumericEpsilon);
        if (std::abs(ratio - expected) > 1e-8) {
          return "ratio " + std::to_string(ratio) + " vs tail fraction " +
                 std::to_string(expected);
        }
        if (ratio < 0.0 || ratio > 1.0) {
          return std::string("ratio outside [0, 1]");
        }
        return std::string();
      }));

  results.push_back(run_property(
      "drift/permutation-invariance", options, [&](std::uint64_t trial_seed) {
        CounterRng rng(trial_seed, 13);
        Eigen::Index d = 6 + static_cast<Eigen::Index>(rng.next_below(8));
        Eigen::Index n = d + 10 + static_cast<Eigen::Index>(rng.next_below(20));
        drift::FeatureMatrix cloud{random_unit_rows(rng, n, d), true};
        Eigen::Index rank = 1 + static_cast<Eigen::Index>(
            rng.next_below(static_cast<std::uint64_t>(d - 1)));
        // Fisher-Yates shuffle of the rows.
        drift::FeatureMatrix shuffled = cloud;
        for (Eigen::Index i = n - 1; i > 0; --i) {
          Eigen::Index j = static_cast<Eigen::Index>(
              rng.next_below(static_cast<std::uint64_t>(i + 1)));
          shuffled.rows.row(i).swap(shuffled.rows.row(j));
        }
        Eigen::MatrixXd basis_a = drift::fit_subspace(cloud, rank).basis;
        Eigen::MatrixXd basis_b = drift::fit_subspace(shuffled, rank).basis;
        if ((basis_a - basis_b).cwiseAbs().maxCoeff() > 1e-8) {
          return std::string("permuted cloud changed the fitted basis");
        }
        return std::string();
      }));

  results.push_back(run_property(
      "drift/self-drift-zero", options, [&](std::uint64_t trial_seed) {
        CounterRng rng(trial_seed, 14);
        Eigen::Index n = 20 + static_cast<Eigen::Index>(rng.next_below(40));
        Eigen::Index d = 4 + static_cast<Eigen::Index>(rng.next_below(28));
        drift::FeatureMatrix cloud{random_unit_rows(rng, n, d), true};
        Eigen::Index rank = 1 + static_cast<Eigen::Index>(rng.next_below(
            static_cast<std::uint64_t>(std::min(n - 1, d))));
        drift::DriftReport report = drift::manifold_drift(cloud, cloud, rank);
        if (std::abs(report.delta) > 1e-10) {
          return "self drift " + std::to_string(report.delta);
        }
        return std::string();
      }));

  results.push_back(run_property(
      "drift/decompose-orthogonal", options, [&](std::uint64_t trial_seed) {
        CounterRng rng(trial_seed, 15);
        Eigen::Index d = 4 + static_cast<Eigen::Index>(rng.next_below(28));
        Eigen::Index q = 1 + static_cast<Eigen::Index>(
            rng.next_below(static_cast<std::uint64_t>(d - 1)));
        Eigen::MatrixXd raw(d, q);
        for (Eigen::Index j = 0; j < q; ++j) {
          raw.col(j) = gaussian(rng, d);
        }
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(raw);
        Eigen::MatrixXd basis =
            qr.householderQ() * Eigen::MatrixXd::Identity(d, q);
        Eigen::VectorXd delta = gaussian(rng, d);
        drift::ShiftDecomposition parts = drift::decompose_shift(delta, basis);
        if ((parts.in_subspace + parts.complement - delta)
                .cwiseAbs()
                .maxCoeff() > 1e-12) {
          return std::string("parts do not sum to the input");
        }
        double dot = parts.in_subspace.dot(parts.complement);
        if (std::abs(dot) > 1e-10 * std::max(1.0, delta.squaredNorm())) {
          return "parts are not orthogonal, dot " + std::to_string(dot);
        }
        return std::string();
      }));

  return results;
}

// --- bounds suite ---

std::vector<PropertyResult> bounds_suite(const Options& rough_options) {
  Options options = rough_options;
  options.trials = std::max<long long>(rough_options.trials / 10, 8);

  std::vector<PropertyResult> results;

  results.push_back(run_property(
      "bounds/logit-perturbation", options, [&](std::uint64_t trial_seed) {
        CounterRng rng(trial_seed, 21);
        Eigen::Index n = 1 + static_cast<Eigen::Index>(rng.next_below(32));
        Eigen::Index c = 1 + static_cast<Eigen::Index>(rng.next_below(8));
        Eigen::Index d = 2 + static_cast<Eigen::Index>(rng.next_below(31));
        double tau_choices[] = {0.5, 1.0, 2.0};
        double tau = tau_choices[rng.next_below(3)];
        Eigen::MatrixXd frozen_vis = random_unit_rows(rng, n, d);
        Eigen::MatrixXd fused_vis = random_unit_rows(rng, n, d);
        Eigen::MatrixXd prototypes = random_unit_rows(rng, c, d);
        Eigen::MatrixXd fused_txt = random_unit_rows(rng, c, d);
        double empirical = bounds::empirical_logit_perturbation(
            fused_vis, fused_txt, frozen_vis, prototypes, tau);
        double l_img = 1.0 - (fused_vis.array() * frozen_vis.array())
                                 .rowwise()
                                 .sum()
                                 .mean();
        double l_txt = 1.0 - (fused_txt.array() * prototypes.array())
                                 .rowwise()
                                 .sum()
                                 .mean();
        double bound = bounds::logit_perturbation_bound(
            tau, static_cast<long>(c), l_img + l_txt);
        if (empirical > bound + 1e-9) {
          return "empirical " + std::to_string(empirical) + " above bound " +
                 std::to_string(bound);
        }
        return std::string();
      }));

  results.push_back(run_property(
      "bounds/ce-bounded", options, [&](std::uint64_t trial_seed) {
        CounterRng rng(trial_seed, 22);
        Eigen::Index c = 1 + static_cast<Eigen::Index>(rng.next_below(16));
        Eigen::Index d = 2 + static_cast<Eigen::Index>(rng.next_below(31));
        double tau_choices[] = {0.5, 1.0, 2.0};
        double tau = tau_choices[rng.next_below(3)];
        Eigen::VectorXd vis = random_unit(rng, d).vec();
        Eigen::MatrixXd txt = random_unit_rows(rng, c, d);
        losses::LogitVector lv = losses::logits(vis, txt, tau);
        int label = static_cast<int>(rng.next_below(
            static_cast<std::uint64_t>(c)));
        double ce = losses::cross_entropy(lv, label);
        double upper = bounds::loss_bound_B(static_cast<long>(c), tau);
        if (ce < -1e-9 || ce > upper + 1e-9) {
          return "cross entropy " + std::to_string(ce) + " outside [0, " +
                 std::to_string(upper) + "]";
        }
        return std::string();
      }));

  results.push_back(run_property(
      "bounds/ce-lipschitz", options, [&](std::uint64_t trial_seed) {
        CounterRng rng(trial_seed, 23);
        Eigen::Index c = 2 + static_cast<Eigen::Index>(rng.next_below(15));
        double tau = 0.5 + 3.5 * rng.next_double();
        losses::LogitVector a, b;
        a.temperature = b.temperature = tau;
        a.values.resize(c);
        b.values.resize(c);
        for (Eigen::Index j = 0; j < c; ++j) {
          a.values(j) = tau * rng.next_uniform(-1.0, 1.0);
          b.values(j) = tau * rng.next_uniform(-1.0, 1.0);
        }
        int label = static_cast<int>(rng.next_below(
            static_cast<std::uint64_t>(c)));
        double lhs = std::abs(losses::cross_entropy(a, label) -
                              losses::cross_entropy(b, label));
        double rhs = std::sqrt(2.0) * (a.values - b.values).norm();
        if (lhs > rhs + 1e-9) {
          return "CE difference " + std::to_string(lhs) +
                 " above sqrt(2) * logit distance " + std::to_string(rhs);
        }
        return std::string();
      }));

  results.push_back(run_property(
      "bounds/rademacher-monotone", options, [&](std::uint64_t trial_seed) {
        CounterRng rng(trial_seed, 24);
        bounds::BoundParams params;
        params.tau = 0.5 + 2.0 * rng.next_double();
        params.num_classes = 1 + static_cast<long>(rng.next_below(16));
        params.num_samples = 16 + static_cast<long>(rng.next_below(512));
        params.prompt_dim = 1 + static_cast<long>(rng.next_below(64));
        params.param_radius = 0.5 + rng.next_double();
        params.lipschitz = 0.5 + rng.next_double();
        params.confidence = 0.05;
        // Monotonicity in eps is a theorem only while the log argument stays
        // at or above sqrt(e); cap the grid accordingly.
        double chi_cap = 3.0 * std::exp(0.5) * params.lipschitz *
                         params.param_radius;
        double eps_cap = chi_cap * chi_cap /
                         (8.0 * params.tau * params.tau *
                          static_cast<double>(params.num_classes));
        double previous = 0.0;
        for (int step = 1; step <= 16; ++step) {
          params.epsilon = eps_cap * static_cast<double>(step) / 16.0;
          double value = bounds::rademacher_bound(params);
          if (value + 1e-12 < previous) {
            return "bound decreased from " + std::to_string(previous) +
                   " to " + std::to_string(value) + " at eps " +
                   std::to_string(params.epsilon);
          }
          previous = value;
        }
        return std::string();
      }));

  results.push_back(run_property(
      "bounds/anchor-stats", options, [&](std::uint64_t trial_seed) {
        CounterRng rng(trial_seed, 25);
        Eigen::Index c = 1 + static_cast<Eigen::Index>(rng.next_below(8));
        Eigen::Index d = 2 + static_cast<Eigen::Index>(rng.next_below(15));
        Eigen::MatrixXd anchors = random_unit_rows(rng, c, d);
        std::vector<Eigen::MatrixXd> candidates;
        for (Eigen::Index k = 0; k < c; ++k) {
          Eigen::Index m = 1 + static_cast<Eigen::Index>(rng.next_below(6));
          candidates.push_back(random_unit_rows(rng, m, d));
        }
        bounds::AnchorStats stats = bounds::anchor_stats(anchors, candidates);
        if (stats.eps_proj > stats.zeta_max * stats.zeta_max + 1e-12) {
          return "eps_proj " + std::to_string(stats.eps_proj) +
                 " above zeta_max^2";
        }
        return std::string();
      }));

  results.push_back(run_property(
      "bounds/dominates-empirical", options, [&](std::uint64_t trial_seed) {
        CounterRng rng(trial_seed, 26);
        bounds::BoundParams params;
        params.tau = 0.5 + 2.0 * rng.next_double();
        params.num_classes = 1 + static_cast<long>(rng.next_below(16));
        params.num_samples = 2 + static_cast<long>(rng.next_below(512));
        params.confidence = 0.01 + 0.9 * rng.next_double();
        params.epsilon = 0.0;
        double risk = 3.0 * rng.next_double();
        if (bounds::generalization_bound(risk, params) < risk) {
          return std::string("bound fell below the empirical risk");
        }
        return std::string();
      }));

  return results;
}

// --- gradient suite ---

std::vector<PropertyResult> grad_suite(const Options& rough_options) {
  Options options = rough_options;
  options.trials = std::max<long long>(rough_options.trials / 500, 6);

  std::vector<PropertyResult> results;
  results.push_back(run_property(
      "grad/finite-difference", options, [&](std::uint64_t trial_seed) {
        CounterRng rng(trial_seed, 31);
        const Eigen::Index n = 4;
        const Eigen::Index c = 3;
        const Eigen::Index d = 8;
        double lambda_choices[] = {0.0, 1.0, 12.0};
        double lambda = lambda_choices[rng.next_below(3)];
        double tau = 0.5 + 3.5 * rng.next_double();

        Eigen::MatrixXd frozen_vis = random_unit_rows(rng, n, d);
        Eigen::MatrixXd frozen_txt = random_unit_rows(rng, c, d);
        std::vector<int> labels;
        for (Eigen::Index i = 0; i < n; ++i) {
          labels.push_back(static_cast<int>(rng.next_below(
              static_cast<std::uint64_t>(c))));
        }
        std::vector<Eigen::MatrixXd> proto_features;
        for (Eigen::Index k = 0; k < c; ++k) {
          proto_features.push_back(random_unit_rows(rng, 2, d));
        }
        losses::PrototypeBank bank =
            losses::build_prototypes(std::move(proto_features));
        PromptParams params = PromptParams::zeros(d);
        for (Eigen::Index i = 0; i < d; ++i) {
          for (Eigen::Index j = 0; j < d; ++j) {
            params.vis_map(i, j) = 0.1 * rng.next_normal();
            params.txt_map(i, j) = 0.1 * rng.next_normal();
          }
          params.vis_bias(i) = 0.1 * rng.next_normal();
          params.txt_bias(i) = 0.1 * rng.next_normal();
        }

        PromptParams analytic = losses::grad_total(
            frozen_vis, frozen_txt, labels, bank, lambda, tau, params);

        auto loss_at = [&](const PromptParams& p) {
          return losses::total_loss_from_params(frozen_vis, frozen_txt,
                                                labels, bank, lambda, tau, p)
              .total;
        };
        const double step = 1e-5;
        auto central_diff = [&](auto set_entry) {
          PromptParams plus = params;
          PromptParams minus = params;
          set_entry(plus, step);
          set_entry(minus, -step);
          return (loss_at(plus) - loss_at(minus)) / (2.0 * step);
        };

        double err_sq = 0.0;
        double ref_sq = 0.0;
        auto accumulate = [&](double analytic_entry, double numeric_entry) {
          err_sq += (analytic_entry - numeric_entry) *
                    (analytic_entry - numeric_entry);
          ref_sq += numeric_entry * numeric_entry;
        };
        for (Eigen::Index i = 0; i < d; ++i) {
          for (Eigen::Index j = 0; j < d; ++j) {
            accumulate(analytic.vis_map(i, j),
                       central_diff([&](PromptParams& p, double h) {
                         p.vis_map(i, j) += h;
                       }));
            accumulate(analytic.txt_map(i, j),
                       central_diff([&](PromptParams& p, double h) {
                         p.txt_map(i, j) += h;
                       }));
          }
          accumulate(analytic.vis_bias(i),
                     central_diff([&](PromptParams& p, double h) {
                       p.vis_bias(i) += h;
                     }));
          accumulate(analytic.txt_bias(i),
                     central_diff([&](PromptParams& p, double h) {
                       p.txt_bias(i) += h;
                     }));
        }
        double relative =
            std::sqrt(err_sq) / std::max(std::sqrt(ref_sq), 1e-8);
        if (relative >= 1e-5) {
          return "relative error " + std::to_string(relative);
        }
        return std::string();
      }));
  return results;
}

}  // namespace

bool is_known_suite(const std::string& suite) {
  return suite == "sphere" || suite == "drift" || suite == "bounds" ||
         suite == "grad" || suite == "all";
}

std::vector<PropertyResult> run_suite(const std::string& suite,
                                      const Options& options) {
  if (!is_known_suite(suite)) {
    throw InvalidArgument("unknown verify suite \"" + suite + "\"");
  }
  std::vector<PropertyResult> results;
  auto append = [&](std::vector<PropertyResult> extra) {
    for (auto& r : extra) {
      results.push_back(std::move(r));
    }
  };
  if (suite == "sphere" || suite == "all") {
    append(sphere_suite(options));
  }
  if (suite == "drift" || suite == "all") {
    append(drift_suite(options));
  }
  if (suite == "bounds" || suite == "all") {
    append(bounds_suite(options));
  }
  if (suite == "grad" || suite == "all") {
    append(grad_suite(options));
  }
  return results;
}

}  // namespace mftb::verify
