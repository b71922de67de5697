#include <cmath>

#include <doctest.h>

#include "mftb/bounds.hpp"
#include "mftb/losses.hpp"
#include "mftb/rng.hpp"
#include "oracles.hpp"

using namespace mftb;

TEST_CASE("loss bound B") {
  CHECK(bounds::loss_bound_B(1, 1.0) == doctest::Approx(2.0));
  CHECK(bounds::loss_bound_B(2, 1.0) ==
        doctest::Approx(2.6931471805599453).epsilon(1e-12));
  CHECK(bounds::loss_bound_B(1000, 1.0) ==
        doctest::Approx(8.907755278982137).epsilon(1e-12));
  CHECK_THROWS_AS(bounds::loss_bound_B(0, 1.0), InvalidArgument);
  CHECK_THROWS_AS(bounds::loss_bound_B(2, 0.0), InvalidArgument);
}

TEST_CASE("logit perturbation bound") {
  CHECK(bounds::logit_perturbation_bound(1.0, 2, 0.0) == doctest::Approx(0.0));
  CHECK(bounds::logit_perturbation_bound(1.0, 2, 0.5) == doctest::Approx(4.0));
  CHECK(bounds::logit_perturbation_bound(2.0, 3, 1.0) ==
        doctest::Approx(48.0));
}

TEST_CASE("empirical logit perturbation") {
  SUBCASE("vanishes when nothing moved") {
    CounterRng rng(13, 1);
    Eigen::MatrixXd vis = oracles::random_unit_rows(rng, 5, 6);
    Eigen::MatrixXd txt = oracles::random_unit_rows(rng, 3, 6);
    CHECK(bounds::empirical_logit_perturbation(vis, txt, vis, txt, 1.5) ==
          doctest::Approx(0.0));
  }
  SUBCASE("single-class closed form") {
    // Prototype and fused text both e1; the visual feature rotates by theta,
    // so the per-sample perturbation is tau^2 (1 - cos theta)^2.
    const double theta = 0.7;
    const double tau = 1.3;
    Eigen::MatrixXd prototype = Eigen::MatrixXd::Zero(1, 4);
    prototype(0, 0) = 1.0;
    Eigen::MatrixXd frozen_vis = prototype;
    Eigen::MatrixXd fused_vis = Eigen::MatrixXd::Zero(1, 4);
    fused_vis(0, 0) = std::cos(theta);
    fused_vis(0, 1) = std::sin(theta);
    double value = bounds::empirical_logit_perturbation(
        fused_vis, prototype, frozen_vis, prototype, tau);
    double drop = 1.0 - std::cos(theta);
    CHECK(value == doctest::Approx(tau * tau * drop * drop).epsilon(1e-12));
  }
  SUBCASE("stays below the closed-form bound") {
    CounterRng rng(14, 1);
    for (int trial = 0; trial < 200; ++trial) {
      Eigen::Index n = 1 + static_cast<Eigen::Index>(rng.next_below(12));
      Eigen::Index c = 1 + static_cast<Eigen::Index>(rng.next_below(6));
      Eigen::Index d = 2 + static_cast<Eigen::Index>(rng.next_below(14));
      double tau = 0.5 + 2.0 * rng.next_double();
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
      CHECK(empirical <=
            bounds::logit_perturbation_bound(tau, c, l_con) + 1e-9);
    }
  }
}

TEST_CASE("rademacher bound closed form") {
  bounds::BoundParams params;
  params.tau = 1.0;
  params.num_classes = 2;
  params.num_samples = 144;
  params.prompt_dim = 1;
  params.epsilon = 0.5;
  params.lipschitz = 1.0;
  // Chosen so the log argument is exactly e: Lambda R = 2 sqrt(2) / 3.
  params.param_radius = 2.0 * std::sqrt(2.0) / 3.0;
  CHECK(bounds::rademacher_bound(params) ==
        doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-12));

  SUBCASE("vanishes monotonically as epsilon decreases") {
    double previous = bounds::rademacher_bound(params);
    for (int step = 1; step <= 12; ++step) {
      params.epsilon = 0.5 * std::pow(0.5, step);
      double value = bounds::rademacher_bound(params);
      CHECK(value < previous);
      previous = value;
    }
    CHECK(previous < 1e-2);
    params.epsilon = 0.0;
    CHECK(bounds::rademacher_bound(params) == doctest::Approx(0.0));
  }
  SUBCASE("degenerate regime is an error") {
    bounds::BoundParams bad = params;
    // Log argument 0.5: Lambda R = sqrt(2) / (3 e).
    bad.epsilon = 0.5;
    bad.param_radius = std::sqrt(2.0) / (3.0 * std::exp(1.0));
    CHECK_THROWS_AS(bounds::rademacher_bound(bad), DegenerateRegime);
  }
}

TEST_CASE("generalization bound") {
  bounds::BoundParams params;
  params.tau = 1.0;
  params.num_classes = 1;  // B = 2
  params.num_samples = 2;
  params.epsilon = 0.0;
  params.confidence = 4.0 / std::exp(2.0);  // log(4 / rho) = 2

  bounds::BoundTerms terms = bounds::generalization_terms(0.3, params);
  CHECK(terms.deviation ==
        doctest::Approx(4.0 * std::sqrt(2.0)).epsilon(1e-12));
  CHECK(terms.complexity == doctest::Approx(0.0));
  CHECK(terms.value == doctest::Approx(0.3 + 4.0 * std::sqrt(2.0)));

  SUBCASE("zero risk leaves the complexity terms alone") {
    CHECK(bounds::generalization_bound(0.0, params) ==
          doctest::Approx(terms.complexity + terms.deviation));
  }
  SUBCASE("doubling N shrinks the deviation by sqrt(2)") {
    bounds::BoundParams doubled = params;
    doubled.num_samples = 4;
    bounds::BoundTerms after = bounds::generalization_terms(0.3, doubled);
    CHECK(terms.deviation / after.deviation ==
          doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  }
  SUBCASE("never falls below the empirical risk") {
    CounterRng rng(3, 3);
    for (int trial = 0; trial < 100; ++trial) {
      bounds::BoundParams random = params;
      random.num_samples = 1 + static_cast<long>(rng.next_below(500));
      random.confidence = 0.01 + 0.9 * rng.next_double();
      double risk = 5.0 * rng.next_double();
      CHECK(bounds::generalization_bound(risk, random) >= risk);
    }
  }
}

TEST_CASE("peeling depth and bound") {
  CHECK(bounds::peeling_depth(128) == 7);
  CHECK(bounds::peeling_depth(100) == 7);
  CHECK(bounds::peeling_depth(1000) == 10);
  CHECK(bounds::peeling_depth(1) == 0);

  bounds::BoundParams params;
  params.tau = 1.0;
  params.num_classes = 4;
  params.num_samples = 128;
  params.prompt_dim = 8;
  params.lipschitz = 10.0;
  params.param_radius = 10.0;
  params.confidence = 0.05;

  bounds::BoundTerms terms = bounds::peeling_terms(0.2, 0.5, params);
  CHECK(terms.peeling_depth == 7);
  CHECK(terms.value ==
        doctest::Approx(0.2 + terms.complexity + terms.deviation));

  SUBCASE("halving l_con shrinks the complexity term moderately") {
    bounds::BoundTerms halved = bounds::peeling_terms(0.2, 0.25, params);
    double ratio = halved.complexity / terms.complexity;
    CHECK(ratio > 1.0 / std::sqrt(2.0));
    CHECK(ratio < 1.0);
  }
  SUBCASE("l_con range validation") {
    CHECK_THROWS_AS(bounds::peeling_bound(0.2, 0.0, params), LConOutOfRange);
    CHECK_THROWS_AS(bounds::peeling_bound(0.2, 1.5, params), LConOutOfRange);
  }
  SUBCASE("degenerate regime propagates") {
    bounds::BoundParams bad = params;
    bad.lipschitz = 1e-4;
    bad.param_radius = 1e-4;
    CHECK_THROWS_AS(bounds::peeling_bound(0.2, 0.5, bad), DegenerateRegime);
  }
}

TEST_CASE("anchor statistics") {
  const Eigen::Index d = 3;
  Eigen::MatrixXd e1 = Eigen::MatrixXd::Zero(1, d);
  e1(0, 0) = 1.0;

  SUBCASE("anchors inside their candidate sets") {
    bounds::AnchorStats stats = bounds::anchor_stats(e1, {e1});
    CHECK(stats.zeta_max == doctest::Approx(0.0));
    CHECK(stats.eps_proj == doctest::Approx(0.0));
  }
  SUBCASE("nearest of two candidates") {
    Eigen::MatrixXd candidates(2, d);
    candidates.setZero();
    candidates(0, 1) = 1.0;   // e2, distance sqrt(2)
    candidates(1, 0) = -1.0;  // -e1, distance 2
    bounds::AnchorStats stats = bounds::anchor_stats(e1, {candidates});
    CHECK(stats.per_class_distance[0] ==
          doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    CHECK(stats.zeta_max == doctest::Approx(std::sqrt(2.0)));
    CHECK(stats.eps_proj == doctest::Approx(2.0));
  }
  SUBCASE("aggregates over two classes") {
    Eigen::MatrixXd anchors(2, d);
    anchors.setZero();
    anchors(0, 0) = 1.0;
    anchors(1, 1) = 1.0;
    Eigen::MatrixXd far(1, d);
    far.setZero();
    far(0, 1) = 1.0;  // distance sqrt(2) from e1
    Eigen::MatrixXd same(1, d);
    same.setZero();
    same(0, 1) = 1.0;  // distance 0 from e2
    bounds::AnchorStats stats = bounds::anchor_stats(anchors, {far, same});
    CHECK(stats.zeta_max == doctest::Approx(std::sqrt(2.0)));
    CHECK(stats.eps_proj == doctest::Approx(1.0));
  }
  SUBCASE("empty candidate set") {
    CHECK_THROWS_AS(bounds::anchor_stats(e1, {Eigen::MatrixXd(0, d)}),
                    EmptyClass);
  }
}

TEST_CASE("non-opposition margins") {
  CounterRng rng(21, 9);
  Eigen::MatrixXd frozen = oracles::random_unit_rows(rng, 6, 5);
  CHECK(bounds::non_opposition_margins(frozen, frozen) ==
        doctest::Approx(2.0));

  Eigen::MatrixXd with_antipode = frozen;
  with_antipode.row(3) = -frozen.row(3);
  CHECK(bounds::non_opposition_margins(frozen, with_antipode) ==
        doctest::Approx(0.0));

  CHECK_THROWS_AS(
      bounds::non_opposition_margins(frozen, frozen.topRows(3)),
      ShapeMismatch);
}

TEST_CASE("cross entropy respects B and the sqrt(2) Lipschitz constant") {
  CounterRng rng(22, 9);
  for (int trial = 0; trial < 300; ++trial) {
    Eigen::Index c = 1 + static_cast<Eigen::Index>(rng.next_below(12));
    Eigen::Index d = 2 + static_cast<Eigen::Index>(rng.next_below(14));
    double tau = trial % 3 == 0 ? 0.5 : (trial % 3 == 1 ? 1.0 : 2.0);
    Eigen::MatrixXd txt = oracles::random_unit_rows(rng, c, d);
    losses::LogitVector lv =
        losses::logits(oracles::random_unit(rng, d), txt, tau);
    int label = static_cast<int>(rng.next_below(
        static_cast<std::uint64_t>(c)));
    double ce = losses::cross_entropy(lv, label);
    CHECK(ce >= -1e-9);
    CHECK(ce <= bounds::loss_bound_B(c, tau) + 1e-9);

    losses::LogitVector other =
        losses::logits(oracles::random_unit(rng, d), txt, tau);
    double lhs = std::abs(ce - losses::cross_entropy(other, label));
    CHECK(lhs <= std::sqrt(2.0) * (lv.values - other.values).norm() + 1e-9);
  }
}
