#include <benchmark/benchmark.h>

#include "dsacd/diffusion/sampler.hpp"
#include "dsacd/entropy/gmm.hpp"
#include "dsacd/io/config.hpp"
#include "dsacd/nn/mlp_predictor.hpp"
#include "dsacd/policy/diffusion_policy.hpp"
#include "dsacd/runtime/trainer.hpp"
#include "dsacd/value/bellman.hpp"

using namespace dsacd;

namespace {

nn::MlpNoisePredictor make_predictor(Index sample_dim, Index cond_dim) {
  Rng rng(1);
  nn::MlpPredictorConfig c;
  c.sample_dim = sample_dim;
  c.cond_dim = cond_dim;
  return nn::MlpNoisePredictor(c, rng);
}

io::RunConfig bandit_config(Index batch) {
  io::RunConfig c = io::parse_config({{"env", "bimodal_bandit"}});
  c.trainer.batch_size = batch;
  c.trainer.warmup_steps = batch;
  c.entropy.n_states = 4;
  return c;
}

}  // namespace

static void BM_PredictorForward(benchmark::State& state) {
  const auto pred = make_predictor(1, 2);
  const Index n = state.range(0);
  Rng rng(2);
  const Matrix z = rng.normal_matrix(1, n), cond = rng.normal_matrix(2, n);
  const std::vector<int> steps(static_cast<std::size_t>(n), 5);
  for (auto _ : state) benchmark::DoNotOptimize(pred.forward(z, cond, steps));
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_PredictorForward)->Arg(32)->Arg(256)->Arg(1024);

static void BM_ReverseChain(benchmark::State& state) {
  const auto pred = make_predictor(1, 1);
  const auto sched = diffusion::make_schedule(20, 1e-3, 0.4);
  const Index n = state.range(0);
  const Matrix cond = Matrix::Zero(1, n);
  std::uint64_t seed = 0;
  for (auto _ : state) {
    diffusion::SampleRequest req{n, cond, true, ++seed};
    benchmark::DoNotOptimize(diffusion::reverse_sample(req, pred, sched));
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_ReverseChain)->Arg(32)->Arg(256);

static void BM_EmFit(benchmark::State& state) {
  Rng rng(3);
  Matrix x = rng.normal_matrix(1, state.range(0));
  for (Index j = 0; j < x.cols(); j += 2) x(0, j) += 3.0;
  entropy::EmOptions opts;
  for (auto _ : state) benchmark::DoNotOptimize(entropy::em_fit(x, opts));
}
BENCHMARK(BM_EmFit)->Arg(32)->Arg(256);

static void BM_UpdateStep(benchmark::State& state) {
  runtime::Trainer trainer(bandit_config(state.range(0)));
  while (trainer.buffer().size() < state.range(0)) trainer.train_iteration();
  for (auto _ : state) benchmark::DoNotOptimize(trainer.update_step());
}
BENCHMARK(BM_UpdateStep)->Arg(32)->Arg(256)->Unit(benchmark::kMillisecond);

static void BM_PolicyLoss(benchmark::State& state) {
  runtime::Trainer trainer(bandit_config(32));
  const Index n = state.range(0);
  const Matrix states = Matrix::Zero(1, n);
  const value::DiffusionCritic critic(trainer.value_model(), 2);
  Rng rng(4);
  for (auto _ : state) benchmark::DoNotOptimize(policy::policy_loss(trainer.policy_model(), critic, states, rng));
}
BENCHMARK(BM_PolicyLoss)->Arg(32)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
