#include <benchmark/benchmark.h>

#include "dfx/losses/losses.hpp"
#include "dfx/models/generator.hpp"
#include "dfx/models/substitute.hpp"
#include "dfx/models/target.hpp"

namespace {

using dfx::nn::Tensor;

void BM_Conv2dForward(benchmark::State& state) {
  dfx::nn::Rng rng(1);
  const auto batch = static_cast<std::size_t>(state.range(0));
  const Tensor x = dfx::nn::sample_normal(rng, {batch, 32, 14, 14});
  const Tensor w = dfx::nn::sample_normal(rng, {64, 32, 3, 3});
  for (auto _ : state) {
    dfx::nn::Tape tape = dfx::nn::Tape::inference();
    benchmark::DoNotOptimize(dfx::nn::conv2d(tape, x, w, {1, 1}));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Conv2dForward)->Arg(32)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_Conv2dBackward(benchmark::State& state) {
  dfx::nn::Rng rng(2);
  const auto batch = static_cast<std::size_t>(state.range(0));
  Tensor x = dfx::nn::sample_normal(rng, {batch, 32, 14, 14});
  Tensor w = dfx::nn::sample_normal(rng, {64, 32, 3, 3});
  x.set_requires_grad(true);
  w.set_requires_grad(true);
  for (auto _ : state) {
    dfx::nn::Tape tape;
    tape.backward(dfx::nn::sum(tape, dfx::nn::conv2d(tape, x, w, {1, 1})));
    x.zero_grad();
    w.zero_grad();
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Conv2dBackward)->Arg(32)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_IntraClassLoss(benchmark::State& state) {
  dfx::nn::Rng rng(3);
  const auto batch = static_cast<std::size_t>(state.range(0));
  Tensor z = dfx::nn::sample_normal(rng, {batch, 128});
  z.set_requires_grad(true);
  for (auto _ : state) {
    dfx::nn::Tape tape;
    tape.backward(dfx::losses::intra_class_loss(tape, z));
    z.zero_grad();
  }
}
BENCHMARK(BM_IntraClassLoss)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_GeneratorStep(benchmark::State& state) {
  dfx::nn::Rng rng(4);
  const dfx::models::GeneratorNet gen({}, rng);
  const dfx::models::SubstituteNet sub({}, rng);
  const Tensor noise = dfx::nn::sample_normal(rng, {256, gen.noise_dim()});
  for (auto _ : state) {
    dfx::nn::Tape tape;
    const Tensor x = gen.generate(tape, noise);
    const Tensor z = sub.encode(tape, x);
    const Tensor probs = dfx::nn::softmax(tape, sub.head(tape, z));
    tape.backward(dfx::nn::add(tape, dfx::losses::intra_class_loss(tape, z),
                               dfx::losses::inter_class_loss(tape, probs)));
    gen.zero_grad();
    sub.zero_grad();
  }
}
BENCHMARK(BM_GeneratorStep)->Unit(benchmark::kMillisecond)->Iterations(3);

void BM_TargetInference(benchmark::State& state) {
  const auto target = dfx::models::build_target({}, 5);
  dfx::nn::Rng rng(5);
  const Tensor x = dfx::nn::sample_uniform(rng, {256, 1, 28, 28});
  for (auto _ : state) benchmark::DoNotOptimize(dfx::models::predict_logits(target, x));
  state.SetItemsProcessed(state.iterations() * 256);
}
BENCHMARK(BM_TargetInference)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
