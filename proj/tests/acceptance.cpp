// Acceptance suite: every release criterion as an executable check, one
// PASS/FAIL line each, nonzero exit when anything fails. Run it through
// ctest (test name "acceptance") or directly:
//   ./mftb_acceptance [path-to-mftb-cli]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include "mftb/bounds.hpp"
#include "mftb/drift.hpp"
#include "mftb/feature_io.hpp"
#include "mftb/losses.hpp"
#include "mftb/rng.hpp"
#include "mftb/sphere.hpp"
#include "mftb/trainer.hpp"
#include "oracles.hpp"

namespace {

namespace fs = std::filesystem;
using namespace mftb;

struct Criterion {
  int number;
  std::string label;
  double budget_seconds;
  std::function<bool(std::string*)> body;
};

std::string cli_path;

bool approx6(double actual, double expected) {
  return std::abs(actual - expected) < 5e-7;
}

// 1. Contraction inequality and closed-form alignment on random unit pairs
// in dimensions {2, 8, 64, 512}.
bool contraction_suite(std::string* detail) {
  CounterRng rng(1, 101);
  const Eigen::Index dims[] = {2, 8, 64, 512};
  long long checked = 0;
  for (Eigen::Index dim : dims) {
    for (int trial = 0; trial < 25000; ++trial) {
      sphere::UnitVector frozen(oracles::random_unit(rng, dim));
      sphere::UnitVector prompt(oracles::random_unit(rng, dim));
      double gamma = sphere::cosine(frozen, prompt);
      if (gamma <= -0.999) {
        continue;
      }
      double gap = sphere::contraction_gap({frozen, prompt});
      if (gap < -1e-12) {
        *detail = "contraction gap " + std::to_string(gap) + " in dim " +
                  std::to_string(dim);
        return false;
      }
      double alignment = sphere::cosine(sphere::fuse(frozen, prompt), frozen);
      if (std::abs(alignment - std::sqrt((1.0 + gamma) / 2.0)) > 1e-10) {
        *detail = "alignment mismatch in dim " + std::to_string(dim);
        return false;
      }
      ++checked;
    }
  }
  *detail = std::to_string(checked) + " pairs";
  return true;
}

// 2. The visual consistency loss equals half the mean squared displacement
// of the fused cloud from the frozen cloud.
bool sphere_identity_suite(std::string* detail) {
  CounterRng rng(2, 102);
  for (int batch = 0; batch < 1000; ++batch) {
    Eigen::Index n = 1 + static_cast<Eigen::Index>(rng.next_below(32));
    Eigen::Index d = 2 + static_cast<Eigen::Index>(rng.next_below(63));
    Eigen::MatrixXd frozen = oracles::random_unit_rows(rng, n, d);
    Eigen::MatrixXd prompt = oracles::random_unit_rows(rng, n, d);
    Eigen::MatrixXd fused = losses::fuse_rows(frozen, prompt);
    double via_cosine = losses::consistency_img(fused, frozen);
    double via_norms = (fused - frozen).rowwise().squaredNorm().mean() / 2.0;
    if (std::abs(via_cosine - via_norms) > 1e-10) {
      *detail = "batch " + std::to_string(batch) + " deviation " +
                std::to_string(via_cosine - via_norms);
      return false;
    }
  }
  *detail = "1000 batches";
  return true;
}

// 3. Empirical mean squared logit perturbation stays below 4 tau^2 C L_con.
bool logit_perturbation_suite(std::string* detail) {
  CounterRng rng(3, 103);
  const double taus[] = {0.5, 1.0, 2.0};
  for (int trial = 0; trial < 1000; ++trial) {
    Eigen::Index n = 1 + static_cast<Eigen::Index>(rng.next_below(32));
    Eigen::Index c = 1 + static_cast<Eigen::Index>(rng.next_below(8));
    Eigen::Index d = 2 + static_cast<Eigen::Index>(rng.next_below(31));
    double tau = taus[trial % 3];
    Eigen::MatrixXd frozen_vis = oracles::random_unit_rows(rng, n, d);
    Eigen::MatrixXd fused_vis = oracles::random_unit_rows(rng, n, d);
    Eigen::MatrixXd prototypes = oracles::random_unit_rows(rng, c, d);
    Eigen::MatrixXd fused_txt = oracles::random_unit_rows(rng, c, d);
    double l_con =
        (1.0 -
         (fused_vis.array() * frozen_vis.array()).rowwise().sum().mean()) +
        (1.0 -
         (fused_txt.array() * prototypes.array()).rowwise().sum().mean());
    double empirical = bounds::empirical_logit_perturbation(
        fused_vis, fused_txt, frozen_vis, prototypes, tau);
    double bound = bounds::logit_perturbation_bound(tau, c, l_con);
    if (empirical > bound + 1e-9) {
      *detail = "ensemble " + std::to_string(trial) + ": " +
                std::to_string(empirical) + " > " + std::to_string(bound);
      return false;
    }
  }
  *detail = "1000 ensembles, tau in {0.5, 1, 2}";
  return true;
}

// 4. Cross-entropy range and sqrt(2)-Lipschitz behaviour for unit-feature
// logits.
bool cross_entropy_suite(std::string* detail) {
  CounterRng rng(4, 104);
  const double taus[] = {0.5, 1.0, 2.0};
  for (int trial = 0; trial < 1000; ++trial) {
    Eigen::Index c = 1 + static_cast<Eigen::Index>(rng.next_below(16));
    Eigen::Index d = 2 + static_cast<Eigen::Index>(rng.next_below(30));
    double tau = taus[trial % 3];
    Eigen::MatrixXd txt = oracles::random_unit_rows(rng, c, d);
    losses::LogitVector a =
        losses::logits(oracles::random_unit(rng, d), txt, tau);
    losses::LogitVector b =
        losses::logits(oracles::random_unit(rng, d), txt, tau);
    int label = static_cast<int>(rng.next_below(
        static_cast<std::uint64_t>(c)));
    double ce_a = losses::cross_entropy(a, label);
    double ce_b = losses::cross_entropy(b, label);
    double upper = bounds::loss_bound_B(c, tau);
    if (ce_a < -1e-9 || ce_a > upper + 1e-9) {
      *detail = "range violation: " + std::to_string(ce_a) + " vs B " +
                std::to_string(upper);
      return false;
    }
    if (std::abs(ce_a - ce_b) >
        std::sqrt(2.0) * (a.values - b.values).norm() + 1e-9) {
      *detail = "Lipschitz violation at trial " + std::to_string(trial);
      return false;
    }
  }
  *detail = "1000 logit vectors and pairs";
  return true;
}

// 5. Drift oracles: self-drift zero, constructed complement drift of one,
// and agreement with the singular tail-energy fraction.
bool drift_oracle_suite(std::string* detail) {
  CounterRng rng(5, 105);
  drift::FeatureMatrix cloud{oracles::random_unit_rows(rng, 500, 128), true};
  for (Eigen::Index rank : {8L, 64L, 128L}) {
    drift::DriftReport report = drift::manifold_drift(cloud, cloud, rank);
    if (std::abs(report.delta) > 1e-10) {
      *detail = "self drift " + std::to_string(report.delta) + " at rank " +
                std::to_string(rank);
      return false;
    }
  }

  Eigen::VectorXd spectrum = oracles::centered_spectrum(cloud.rows);
  for (Eigen::Index rank : {8L, 64L}) {
    drift::PrincipalSubspace sub = drift::fit_subspace(cloud, rank);
    double ratio = drift::off_manifold_ratio(cloud, sub);
    double tail = spectrum.tail(spectrum.size() - rank).squaredNorm();
    double expected =
        tail / (spectrum.squaredNorm() + drift::kNumericEpsilon);
    if (std::abs(ratio - expected) > 1e-8) {
      *detail = "tail-energy mismatch at rank " + std::to_string(rank);
      return false;
    }
  }

  drift::FeatureMatrix in_span, complement;
  in_span.rows.setZero(32, 128);
  complement.rows.setZero(32, 128);
  for (Eigen::Index i = 0; i < 16; ++i) {
    in_span.rows(2 * i, i) = 1.0;
    in_span.rows(2 * i + 1, i) = -1.0;
    complement.rows(2 * i, 16 + i) = 1.0;
    complement.rows(2 * i + 1, 16 + i) = -1.0;
  }
  drift::DriftReport unit_drift =
      drift::manifold_drift(in_span, complement, 16);
  if (std::abs(unit_drift.delta - 1.0) > 1e-9) {
    *detail = "complement drift " + std::to_string(unit_drift.delta);
    return false;
  }
  *detail = "N=500, d=128";
  return true;
}

// 6. Drift is non-increasing across the rank grid for the flattened-spectrum
// cloud.
bool rank_sweep_suite(std::string* detail) {
  Eigen::MatrixXd pretrained, tuned;
  oracles::monotone_sweep_clouds(&pretrained, &tuned);
  drift::FeatureMatrix z{pretrained, false};
  drift::FeatureMatrix h{tuned, false};
  auto reports = drift::drift_sensitivity(z, h, {8, 16, 32, 64, 128});
  std::string values;
  for (std::size_t k = 0; k < reports.size(); ++k) {
    values += (k ? " " : "") + std::to_string(reports[k].delta);
    if (k > 0 && reports[k].delta > reports[k - 1].delta + 1e-12) {
      *detail = "increase at grid point " + std::to_string(k) + ": " + values;
      return false;
    }
  }
  *detail = "deltas " + values;
  return true;
}

// 7. Analytic gradient against central finite differences on small random
// instances for lambda in {0, 1, 12}.
bool gradient_suite(std::string* detail) {
  CounterRng rng(7, 107);
  const double lambdas[] = {0.0, 1.0, 12.0};
  double worst = 0.0;
  for (int instance = 0; instance < 20; ++instance) {
    const Eigen::Index n = 4, c = 3, d = 8;
    Eigen::MatrixXd frozen_vis = oracles::random_unit_rows(rng, n, d);
    Eigen::MatrixXd frozen_txt = oracles::random_unit_rows(rng, c, d);
    std::vector<int> labels;
    for (Eigen::Index i = 0; i < n; ++i) {
      labels.push_back(static_cast<int>(rng.next_below(c)));
    }
    std::vector<Eigen::MatrixXd> protos;
    for (Eigen::Index k = 0; k < c; ++k) {
      protos.push_back(oracles::random_unit_rows(rng, 2, d));
    }
    losses::PrototypeBank bank = losses::build_prototypes(std::move(protos));
    PromptParams params = PromptParams::zeros(d);
    for (Eigen::Index i = 0; i < d; ++i) {
      for (Eigen::Index j = 0; j < d; ++j) {
        params.vis_map(i, j) = 0.12 * rng.next_normal();
        params.txt_map(i, j) = 0.12 * rng.next_normal();
      }
      params.vis_bias(i) = 0.12 * rng.next_normal();
      params.txt_bias(i) = 0.12 * rng.next_normal();
    }
    double tau = 0.5 + 3.0 * rng.next_double();
    for (double lambda : lambdas) {
      PromptParams analytic = losses::grad_total(
          frozen_vis, frozen_txt, labels, bank, lambda, tau, params);
      PromptParams numeric = oracles::finite_difference_gradient(
          [&](const PromptParams& p) {
            return losses::total_loss_from_params(frozen_vis, frozen_txt,
                                                  labels, bank, lambda, tau,
                                                  p)
                .total;
          },
          params, 1e-5);
      double error = oracles::relative_gradient_error(analytic, numeric);
      worst = std::max(worst, error);
      if (error >= 1e-5) {
        *detail = "relative error " + std::to_string(error) +
                  " at lambda " + std::to_string(lambda);
        return false;
      }
    }
  }
  *detail = "20 instances x 3 lambdas, worst " + std::to_string(worst);
  return true;
}

// 8. The lambda ordering on the default shortcut task, seeds 1-3:
// unconstrained training drifts (> 0.05), the constrained run does not
// (< 0.05), and alignment orders the other way.
bool lambda_ordering_suite(std::string* detail) {
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
    trainer::TaskSpec spec;
    trainer::SyntheticTask task = trainer::generate_task(spec, seed);
    trainer::TrainerConfig config;
    config.seed = seed;
    auto rows = trainer::compare_lambda(task, config, {0.0, 12.0});
    double drift_free = rows[0].delta;
    double drift_constrained = rows[1].delta;
    if (!(drift_free > 0.05)) {
      *detail = "seed " + std::to_string(seed) + ": lambda=0 drift " +
                std::to_string(drift_free) + " not above 0.05";
      return false;
    }
    if (!(drift_constrained < 0.05)) {
      *detail = "seed " + std::to_string(seed) + ": lambda=12 drift " +
                std::to_string(drift_constrained) + " not below 0.05";
      return false;
    }
    if (!(drift_free > drift_constrained)) {
      *detail = "seed " + std::to_string(seed) + ": drift ordering violated";
      return false;
    }
    if (!(rows[1].mean_alignment > rows[0].mean_alignment)) {
      *detail = "seed " + std::to_string(seed) + ": alignment ordering "
                "violated";
      return false;
    }
  }
  *detail = "seeds 1, 2, 3";
  return true;
}

// 9. Closed-form bound evaluators reproduce their hand-computed values to
// six decimals; peeling depth matches ceil(log2 N).
bool bound_evaluator_suite(std::string* detail) {
  if (!approx6(bounds::loss_bound_B(1, 1.0), 2.0) ||
      !approx6(bounds::loss_bound_B(2, 1.0), 2.693147) ||
      !approx6(bounds::loss_bound_B(1000, 1.0), 8.907755)) {
    *detail = "loss_bound_B mismatch";
    return false;
  }
  if (!approx6(bounds::logit_perturbation_bound(1.0, 2, 0.0), 0.0) ||
      !approx6(bounds::logit_perturbation_bound(1.0, 2, 0.5), 4.0) ||
      !approx6(bounds::logit_perturbation_bound(2.0, 3, 1.0), 48.0)) {
    *detail = "logit_perturbation_bound mismatch";
    return false;
  }
  bounds::BoundParams params;
  params.tau = 1.0;
  params.num_classes = 2;
  params.num_samples = 144;
  params.prompt_dim = 1;
  params.epsilon = 0.5;
  params.lipschitz = 1.0;
  params.param_radius = 2.0 * std::sqrt(2.0) / 3.0;
  if (!approx6(bounds::rademacher_bound(params), 2.828427)) {
    *detail = "rademacher_bound mismatch";
    return false;
  }
  if (bounds::peeling_depth(100) != 7 || bounds::peeling_depth(128) != 7 ||
      bounds::peeling_depth(1000) != 10) {
    *detail = "peeling depth mismatch";
    return false;
  }
  *detail = "all closed forms to 6 decimals";
  return true;
}

// 10. Round-trip identity for the binary format and byte-stable CSV output
// across two identically seeded runs.
bool io_suite(std::string* detail) {
  CounterRng rng(10, 110);
  fs::path dir = fs::temp_directory_path() / "mftb_acceptance";
  fs::create_directories(dir);
  fs::path file = dir / "roundtrip.mftb";
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::Index n = static_cast<Eigen::Index>(rng.next_below(20));
    Eigen::Index d = 1 + static_cast<Eigen::Index>(rng.next_below(16));
    drift::FeatureMatrix matrix;
    matrix.rows.resize(n, d);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < d; ++j) {
        matrix.rows(i, j) = 1e6 * (rng.next_double() - 0.5);
      }
    }
    io::save_feature_matrix(matrix, file, io::Dtype::kFloat64);
    drift::FeatureMatrix loaded = io::load_feature_matrix(file);
    if (loaded.count() != n || loaded.dim() != d) {
      *detail = "shape mismatch after round trip";
      return false;
    }
    if (n > 0 && (loaded.rows - matrix.rows).cwiseAbs().maxCoeff() != 0.0) {
      *detail = "payload mismatch after round trip";
      return false;
    }
  }

  if (!cli_path.empty()) {
    const std::string task =
        " --classes 4 --dim 16 --transferable-rank 4 --shortcut-rank 4"
        " --train-per-class 4 --test-per-class 8 --epochs 20 --d-pca 4"
        " --lambdas 0,12 --seed 7";
    fs::path csv_a = dir / "stable_a.csv";
    fs::path csv_b = dir / "stable_b.csv";
    std::string base = "\"" + cli_path + "\" compare" + task + " --out ";
    if (std::system((base + csv_a.string() + " >/dev/null").c_str()) != 0 ||
        std::system((base + csv_b.string() + " >/dev/null").c_str()) != 0) {
      *detail = "CLI compare run failed";
      return false;
    }
    std::ifstream a(csv_a, std::ios::binary), b(csv_b, std::ios::binary);
    std::string bytes_a((std::istreambuf_iterator<char>(a)),
                        std::istreambuf_iterator<char>());
    std::string bytes_b((std::istreambuf_iterator<char>(b)),
                        std::istreambuf_iterator<char>());
    if (bytes_a.empty() || bytes_a != bytes_b) {
      *detail = "CSV output is not byte-stable across runs";
      return false;
    }
    *detail = "100 round trips, CSV byte-stable";
  } else {
    *detail = "100 round trips (CLI path not provided, CSV check skipped)";
  }
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc > 1) {
    cli_path = argv[1];
  }

  std::vector<Criterion> criteria = {
      {1, "contraction gap and fusion alignment", 5.0, contraction_suite},
      {2, "sphere identity / consistency equivalence", 5.0,
       sphere_identity_suite},
      {3, "logit perturbation bound", 10.0, logit_perturbation_suite},
      {4, "cross-entropy range and Lipschitz constant", 10.0,
       cross_entropy_suite},
      {5, "drift metric oracles", 5.0, drift_oracle_suite},
      {6, "rank-sweep monotonicity", 5.0, rank_sweep_suite},
      {7, "analytic gradient vs finite differences", 10.0, gradient_suite},
      {8, "lambda ordering on the shortcut task", 60.0,
       lambda_ordering_suite},
      {9, "closed-form bound evaluators", 1.0, bound_evaluator_suite},
      {10, "binary round trip and CSV stability", 5.0, io_suite},
  };

  int failures = 0;
  for (auto& criterion : criteria) {
    auto start = std::chrono::steady_clock::now();
    std::string detail;
    bool ok = false;
    try {
      ok = criterion.body(&detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                      start)
            .count();
    if (elapsed > criterion.budget_seconds) {
      ok = false;
      detail += " [over time budget " +
                std::to_string(criterion.budget_seconds) + "s]";
    }
    std::printf("criterion %2d [%s] %s (%.2fs) %s\n", criterion.number,
                ok ? "PASS" : "FAIL", criterion.label.c_str(), elapsed,
                detail.c_str());
    if (!ok) {
      ++failures;
    }
  }
  if (failures > 0) {
    std::printf("%d criterion(s) failed\n", failures);
    return 1;
  }
  std::printf("all criteria passed\n");
  return 0;
}
