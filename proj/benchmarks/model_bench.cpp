// Copyright (c) 2026 The citss authors
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include "citss/backbone.hpp"
#include "citss/demo.hpp"
#include "citss/head.hpp"

namespace {

using namespace citss;

Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols,
                              std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = rng.normal();
  return m;
}

void BM_EncodeBatch(benchmark::State& state) {
  backbone::HashedEncoderConfig config;
  config.hidden = 64;
  config.vocab = 4096;
  config.max_len = 160;
  backbone::HashedEncoder bb(config, 1);
  const auto bundle = demo::generate(demo::DemoSpec::toy(64), 5);
  const auto prompt = backbone::PromptTemplate::builtin_p1();
  std::vector<backbone::RenderedPrompt> batch;
  for (int i = 0; i < state.range(0); ++i)
    batch.push_back(backbone::render_for_encode(
        prompt, bundle.split.train[i % bundle.split.train.size()]));
  for (auto _ : state)
    benchmark::DoNotOptimize(bb.encode_batch(batch, nullptr));
}
BENCHMARK(BM_EncodeBatch)->Arg(4)->Arg(16);

void BM_AdapterForward(benchmark::State& state) {
  Rng rng(7);
  const auto params = head::AdapterParams::init(64, 64, 32, rng);
  const Eigen::MatrixXd X = random_matrix(state.range(0), 64, 11);
  for (auto _ : state)
    benchmark::DoNotOptimize(head::adapter_forward_batch(X, params));
}
BENCHMARK(BM_AdapterForward)->Arg(4)->Arg(16);

void BM_AdapterBackward(benchmark::State& state) {
  Rng rng(7);
  const auto params = head::AdapterParams::init(64, 64, 32, rng);
  const Eigen::MatrixXd X = random_matrix(state.range(0), 64, 11);
  const Eigen::MatrixXd dZ = random_matrix(state.range(0), 32, 13);
  head::AdapterTrace trace;
  head::adapter_forward_batch(X, params, &trace);
  auto grads = head::AdapterGrads::zeros_like(params);
  for (auto _ : state) {
    grads.set_zero();
    benchmark::DoNotOptimize(
        head::adapter_backward(trace, dZ, params, grads));
  }
}
BENCHMARK(BM_AdapterBackward)->Arg(4)->Arg(16);

void BM_InfoNce(benchmark::State& state) {
  const Eigen::MatrixXd Z = random_matrix(state.range(0), 32, 3);
  const Eigen::MatrixXd Zt = random_matrix(state.range(0), 32, 4);
  for (auto _ : state)
    benchmark::DoNotOptimize(head::infonce(Z, Zt, 1.0));
}
BENCHMARK(BM_InfoNce)->Arg(4)->Arg(16);

}  // namespace

BENCHMARK_MAIN();
