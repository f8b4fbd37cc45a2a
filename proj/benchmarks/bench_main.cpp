// Copyright 2026 The brainalign Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <benchmark/benchmark.h>

#include <numeric>
#include <random>

#include "brainalign/align/loss.hpp"
#include "brainalign/cpa/pipeline.hpp"
#include "brainalign/dataio/container.hpp"
#include "brainalign/dataio/synth.hpp"
#include "brainalign/evalkit/retrieval.hpp"
#include "brainalign/tensor/ops.hpp"
#include "brainalign/train/trainer.hpp"

using namespace brainalign;

namespace {

Tensor randn(Shape shape, std::uint64_t seed, DType dtype = DType::f32) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d;
  std::vector<double> v(numel(shape));
  for (double& x : v) x = d(rng);
  return Tensor::from_values(v, std::move(shape), dtype);
}

}  // namespace

static void BM_Matmul(benchmark::State& state) {
  const auto n = std::size_t(state.range(0));
  Tensor a = randn({n, n}, 1), b = randn({n, n}, 2);
  for (auto _ : state) benchmark::DoNotOptimize(matmul(a, b));
  state.SetItemsProcessed(state.iterations() * std::int64_t(2 * n * n * n));
}
BENCHMARK(BM_Matmul)->Arg(64)->Arg(256);

static void BM_Conv2dForwardBackward(benchmark::State& state) {
  Tensor x = randn({64, 1, 16, 48}, 1);
  Tensor w = randn({16, 1, 1, 13}, 2).set_requires_grad();
  for (auto _ : state) {
    sum(conv2d(x, w)).backward();
    w.zero_grad();
  }
}
BENCHMARK(BM_Conv2dForwardBackward);

static void BM_ContrastiveLoss(benchmark::State& state) {
  const auto b = std::size_t(state.range(0));
  Tensor img = randn({b, 64}, 1).set_requires_grad(), eeg = randn({b, 64}, 2).set_requires_grad();
  for (auto _ : state) {
    align::contrastive_loss(align::similarity_matrix(img, eeg, align::LossVariant::asym), 0.07).backward();
    img.zero_grad();
    eeg.zero_grad();
  }
}
BENCHMARK(BM_ContrastiveLoss)->Arg(64)->Arg(256);

static void BM_TrainStep(benchmark::State& state) {
  const auto ds = dataio::synthesize_dataset({}).dataset;
  train::TrainConfig cfg;
  train::Model model(cfg, train::DataShape::of(ds));
  const auto pipeline = train::make_pipeline(cfg);
  std::vector<std::size_t> batch(cfg.batch_size);
  std::iota(batch.begin(), batch.end(), 0);
  std::uint64_t step = 0;
  for (auto _ : state) {
    Tensor loss = train::batch_loss(model, ds, pipeline, batch, 0, step++);
    loss.backward();
    for (auto& p : model.named_parameters()) p.second.zero_grad();
  }
}
BENCHMARK(BM_TrainStep)->Unit(benchmark::kMillisecond);

static void BM_AugmentImages(benchmark::State& state) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<double> px(64 * 3 * 16 * 16);
  for (double& x : px) x = u(rng);
  const Tensor images = Tensor::from_values(px, {64, 3, 16, 16}, DType::f32);
  std::vector<std::size_t> ids(64);
  std::iota(ids.begin(), ids.end(), 0);
  const auto pipeline = cpa::default_pipeline();
  std::uint64_t epoch = 0;
  for (auto _ : state) benchmark::DoNotOptimize(cpa::augment_images(pipeline, images, ids, epoch++));
}
BENCHMARK(BM_AugmentImages);

static void BM_RankRetrieval(benchmark::State& state) {
  const Tensor scores = randn({200, 200}, 4, DType::f64);
  std::vector<std::size_t> truth(200);
  std::iota(truth.begin(), truth.end(), 0);
  for (auto _ : state) benchmark::DoNotOptimize(evalkit::rank_retrieval(scores, truth, 20, {1, 5}, 50, 0));
}
BENCHMARK(BM_RankRetrieval);

static void BM_ContainerRoundTrip(benchmark::State& state) {
  const Tensor t = randn({1000, 16, 48}, 5);
  for (auto _ : state) {
    auto bytes = dataio::encode_container(t);
    benchmark::DoNotOptimize(dataio::decode_container(bytes));
  }
  state.SetBytesProcessed(state.iterations() * std::int64_t(t.size() * 4));
}
BENCHMARK(BM_ContainerRoundTrip);

BENCHMARK_MAIN();
