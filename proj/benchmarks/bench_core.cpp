#include <benchmark/benchmark.h>

#include "mftb/drift.hpp"
#include "mftb/losses.hpp"
#include "mftb/rng.hpp"
#include "mftb/sphere.hpp"
#include "mftb/trainer.hpp"

namespace {

using namespace mftb;

Eigen::MatrixXd unit_rows(CounterRng& rng, Eigen::Index n, Eigen::Index d) {
  Eigen::MatrixXd rows(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::VectorXd v(d);
    for (Eigen::Index j = 0; j < d; ++j) {
      v(j) = rng.next_normal();
    }
    rows.row(i) = (v / v.norm()).transpose();
  }
  return rows;
}

void BM_Fuse(benchmark::State& state) {
  const Eigen::Index d = state.range(0);
  CounterRng rng(1, 1);
  Eigen::MatrixXd pair = unit_rows(rng, 2, d);
  sphere::UnitVector frozen(pair.row(0).transpose());
  sphere::UnitVector prompt(pair.row(1).transpose());
  for (auto _ : state) {
    benchmark::DoNotOptimize(sphere::fuse(frozen, prompt));
  }
}
BENCHMARK(BM_Fuse)->Arg(64)->Arg(512);

void BM_FitSubspace(benchmark::State& state) {
  const Eigen::Index n = 500;
  const Eigen::Index d = state.range(0);
  CounterRng rng(2, 1);
  drift::FeatureMatrix cloud{unit_rows(rng, n, d), true};
  for (auto _ : state) {
    benchmark::DoNotOptimize(drift::fit_subspace(cloud, 64));
  }
}
BENCHMARK(BM_FitSubspace)->Arg(128)->Arg(512);

void BM_OffManifoldRatio(benchmark::State& state) {
  CounterRng rng(3, 1);
  drift::FeatureMatrix cloud{unit_rows(rng, 500, 128), true};
  drift::PrincipalSubspace sub = drift::fit_subspace(cloud, 64);
  for (auto _ : state) {
    benchmark::DoNotOptimize(drift::off_manifold_ratio(cloud, sub));
  }
}
BENCHMARK(BM_OffManifoldRatio);

void BM_GradTotal(benchmark::State& state) {
  trainer::TaskSpec spec;
  trainer::SyntheticTask task = trainer::generate_task(spec, 1);
  std::vector<Eigen::MatrixXd> protos;
  for (Eigen::Index k = 0; k < task.frozen_txt.rows(); ++k) {
    protos.push_back(task.frozen_txt.row(k));
  }
  losses::PrototypeBank bank = losses::build_prototypes(std::move(protos));
  PromptParams params = PromptParams::zeros(spec.dim);
  losses::LossBreakdown breakdown;
  for (auto _ : state) {
    benchmark::DoNotOptimize(losses::grad_total(
        task.train_vis, task.frozen_txt, task.train_labels, bank, 12.0, 8.0,
        params, &breakdown));
  }
}
BENCHMARK(BM_GradTotal);

void BM_TrainEpochs(benchmark::State& state) {
  trainer::TaskSpec spec;
  trainer::SyntheticTask task = trainer::generate_task(spec, 1);
  trainer::TrainerConfig config;
  config.epochs = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(trainer::train(task, config));
  }
}
BENCHMARK(BM_TrainEpochs)->Arg(10)->Unit(benchmark::kMillisecond);

}  // namespace
