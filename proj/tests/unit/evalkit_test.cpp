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

#include <cmath>
#include <fstream>
#include <random>
#include <regex>

#include <gtest/gtest.h>

#include "brainalign/dataio/synth.hpp"
#include "brainalign/error.hpp"
#include "brainalign/evalkit/export.hpp"
#include "brainalign/evalkit/retrieval.hpp"
#include "brainalign/evalkit/sweep.hpp"
#include "brainalign/train/model.hpp"
#include "oracles.hpp"
#include "scratch_dir.hpp"

namespace brainalign::evalkit {
namespace {

Tensor random_scores(std::size_t m, std::size_t p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d;
  std::vector<double> v(m * p);
  for (double& x : v) x = d(rng);
  return Tensor::from_values(v, {m, p}, DType::f64);
}

std::vector<std::size_t> iota(std::size_t n) {
  std::vector<std::size_t> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = i;
  return v;
}

TEST(Retrieval, IdentityMatrixIsPerfect) {
  auto r = rank_retrieval(Tensor::eye(10, DType::f64), iota(10), 10, {1, 5}, 1, 0);
  EXPECT_EQ(r.top(1), 1.0);
  EXPECT_EQ(r.top(5), 1.0);
  for (std::size_t rank : r.ranks) EXPECT_EQ(rank, 1u);
}

TEST(Retrieval, MatchesBruteForceSort) {
  Tensor s = random_scores(50, 50, 3);
  std::mt19937_64 rng(4);
  std::vector<std::size_t> truth(50);
  for (auto& t : truth) t = rng() % 50;
  auto r = rank_retrieval(s, truth, 50, {1, 3, 10}, 1, 0);
  const auto v = s.values<double>();
  const auto all = iota(50);
  std::size_t h1 = 0, h3 = 0, h10 = 0;
  for (std::size_t q = 0; q < 50; ++q) {
    const auto expected = testing::brute_force_rank(v.subspan(q * 50, 50), all, truth[q]);
    EXPECT_EQ(r.ranks[q], expected);
    h1 += expected <= 1;
    h3 += expected <= 3;
    h10 += expected <= 10;
  }
  EXPECT_EQ(r.top(1), double(h1) / 50);
  EXPECT_EQ(r.top(3), double(h3) / 50);
  EXPECT_EQ(r.top(10), double(h10) / 50);
}

TEST(Retrieval, TiesBreakByCandidateIndex) {
  Tensor s = Tensor::full({1, 4}, 0.5, DType::f64);
  std::vector<std::size_t> all = iota(4);
  const auto v = s.values<double>();
  EXPECT_EQ(rank_of(v, all, 0), 1u);
  EXPECT_EQ(rank_of(v, all, 3), 4u);
}

TEST(Retrieval, TopKMonotoneAndRanksInRange) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto r = rank_retrieval(random_scores(30, 40, seed), std::vector<std::size_t>(30, 7), 12, {1, 2, 5, 12}, 5, seed);
    for (std::size_t i = 1; i < r.accuracy.size(); ++i) EXPECT_LE(r.accuracy[i - 1], r.accuracy[i]);
    EXPECT_EQ(r.top(12), 1.0);
    for (std::size_t rank : r.ranks) {
      EXPECT_GE(rank, 1u);
      EXPECT_LE(rank, 12u);
    }
    EXPECT_EQ(r.ranks.size(), 5u * 30);
  }
}

TEST(Retrieval, Pure) {
  Tensor s = random_scores(20, 30, 1);
  auto truth = iota(20);
  auto a = rank_retrieval(s, truth, 10, {1, 5}, 7, 99), b = rank_retrieval(s, truth, 10, {1, 5}, 7, 99);
  EXPECT_EQ(a.ranks, b.ranks);
  EXPECT_EQ(a.to_json(), b.to_json());
}

TEST(Retrieval, SubsampledMatchesHypergeometricExpectation) {
  // A query whose true candidate has full-pool rank r is a top-1 hit in an
  // n-way draw iff none of the r - 1 better candidates is drawn among the
  // n - 1 distractors taken from the P - 1 others.
  const std::size_t M = 200, P = 40, n = 10;
  Tensor s = random_scores(M, P, 5);
  std::mt19937_64 rng(6);
  std::vector<std::size_t> truth(M);
  for (auto& t : truth) t = rng() % P;
  // Bias so true candidates tend to score high.
  auto v = s.to_vector();
  for (std::size_t q = 0; q < M; ++q) v[q * P + truth[q]] += 1.5;
  s = Tensor::from_values(v, {M, P}, DType::f64);
  auto full = rank_retrieval(s, truth, P, {1}, 1, 0);
  auto lchoose = [](double a, double b) { return std::lgamma(a + 1) - std::lgamma(b + 1) - std::lgamma(a - b + 1); };
  double expected = 0;
  for (std::size_t rank : full.ranks) {
    const double better = double(rank - 1), others = double(P - 1);
    if (others - better >= double(n - 1))
      expected += std::exp(lchoose(others - better, double(n - 1)) - lchoose(others, double(n - 1)));
  }
  expected /= double(M);
  auto sub = rank_retrieval(s, truth, n, {1}, 100, 11);
  EXPECT_NEAR(sub.top(1), expected, 0.02);
}

TEST(Retrieval, RejectsBadArguments) {
  Tensor s = random_scores(3, 4, 1);
  auto t = iota(3);
  EXPECT_THROW(rank_retrieval(s, t, 1, {1}, 1, 0), ContractError);
  EXPECT_THROW(rank_retrieval(s, t, 5, {1}, 1, 0), ContractError);
  EXPECT_THROW(rank_retrieval(s, t, 4, {}, 1, 0), ContractError);
  std::vector<std::size_t> bad{0, 1, 9};
  EXPECT_THROW(rank_retrieval(s, bad, 4, {1}, 1, 0), ContractError);
}

TEST(Evaluate, UntrainedModelIsAtChance) {
  dataio::SynthConfig c;
  c.train_concepts = 2;
  c.images_per_concept = 2;
  c.test_concepts = 200;
  c.test_images_per_concept = 1;
  c.eeg_channels = 8;
  c.eeg_samples = 32;
  c.latent_dim = 8;
  c.image_size = 8;
  auto ds = dataio::synthesize_dataset(c).dataset;
  train::TrainConfig cfg;
  cfg.image_source.output_dim = 32;
  cfg.eeg_encoder.output_dim = 32;
  cfg.eval.n_way = 200;
  cfg.eval.top_k = {1, 5};
  train::Model model(cfg, train::DataShape::of(ds));
  auto r = evaluate(model, ds, cfg.eval, ds.train_concepts);
  EXPECT_EQ(r.queries(), 200u);
  EXPECT_TRUE(testing::within_binomial(r.top(1), 1.0 / 200, 200)) << r.top(1);
  EXPECT_TRUE(testing::within_binomial(r.top(5), 5.0 / 200, 200)) << r.top(5);
}

TEST(Evaluate, ZeroShotViolationDetected) {
  dataio::SynthConfig c;
  c.train_concepts = 3;
  c.test_concepts = 3;
  auto ds = dataio::synthesize_dataset(c).dataset;
  train::TrainConfig cfg;
  cfg.eval.n_way = 3;
  train::Model model(cfg, train::DataShape::of(ds));
  auto leaked = ds.train_concepts;
  leaked.push_back(ds.test_concepts[0]);
  EXPECT_THROW(evaluate(model, ds, cfg.eval, leaked), ZeroShotViolation);
  cfg.eval.n_way = 4;
  EXPECT_THROW(evaluate(model, ds, cfg.eval, ds.train_concepts), ContractError);
}

TEST(Export, CsvRoundTripIsBitExact) {
  Tensor s = Tensor::from_values({0.1, -1.0 / 3.0, 1e-300, 12345.678}, {2, 2}, DType::f64);
  EXPECT_EQ(parse_similarity_csv(similarity_csv(s)).to_vector(), s.to_vector());
  Tensor r = random_scores(7, 5, 2);
  EXPECT_EQ(parse_similarity_csv(similarity_csv(r)).to_vector(), r.to_vector());
  EXPECT_THROW(parse_similarity_csv("1,2\n3\n"), FormatError);
}

TEST(Export, SvgCellCountAndDarkDiagonal) {
  std::vector<double> v(16, 0.1);
  for (std::size_t i = 0; i < 4; ++i) v[i * 4 + i] = 0.9;
  const std::string svg = similarity_svg(Tensor::from_values(v, {4, 4}, DType::f64), 10);
  std::regex cell("<rect class=\"cell\" x=\"(\\d+)\" y=\"(\\d+)\"[^>]*fill=\"rgb\\((\\d+),");
  std::size_t count = 0;
  for (auto it = std::sregex_iterator(svg.begin(), svg.end(), cell); it != std::sregex_iterator(); ++it) {
    ++count;
    const int x = std::stoi((*it)[1]), y = std::stoi((*it)[2]), level = std::stoi((*it)[3]);
    if (x == y) EXPECT_EQ(level, 0);
    else EXPECT_EQ(level, 255);
  }
  EXPECT_EQ(count, 16u);
}

TEST(Export, WritesCsvAndSvg) {
  testing::ScratchDir dir;
  auto r = rank_retrieval(Tensor::eye(3, DType::f64), iota(3), 3, {1}, 1, 0);
  export_similarity(r, dir / "sim");
  EXPECT_TRUE(std::filesystem::exists(dir / "sim.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir / "sim.svg"));
}

TEST(Sweep, AxisApplication) {
  train::TrainConfig base;
  EXPECT_EQ(cpa::parse_pipeline(apply_axis(base, SweepAxis::fusion_k, "2").pipeline).views(), 2u);
  EXPECT_EQ(apply_axis(base, SweepAxis::loss_variant, "sym").loss.variant, align::LossVariant::sym);
  auto vanilla = apply_axis(base, SweepAxis::loss_variant, "vanilla");
  EXPECT_FALSE(vanilla.cpa);
  EXPECT_EQ(vanilla.projector.kind, align::ProjectorKind::identity);
  EXPECT_EQ(vanilla.loss.variant, align::LossVariant::plain);
  EXPECT_EQ(apply_axis(base, SweepAxis::batch_size, "16").batch_size, 16u);
  EXPECT_DOUBLE_EQ(apply_axis(base, SweepAxis::temperature, "0.5").loss.temperature, 0.5);
  auto ts = cpa::parse_pipeline(apply_axis(base, SweepAxis::transform_set, "mosaic+low_resolution").pipeline);
  ASSERT_EQ(ts.views(), 2u);
  EXPECT_EQ(cpa::kind_name(ts.image[0]), "mosaic");
  EXPECT_THROW(apply_axis(base, SweepAxis::loss_variant, "nope"), ContractError);
  EXPECT_THROW(parse_sweep_axis("depth"), ContractError);
  EXPECT_EQ(parse_sweep_axis("fusion_K"), SweepAxis::fusion_k);
}

TEST(Sweep, RowsTimesSeeds) {
  dataio::SynthConfig c;
  c.train_concepts = 4;
  c.images_per_concept = 2;
  c.test_concepts = 3;
  c.eeg_channels = 4;
  c.eeg_samples = 24;
  c.latent_dim = 4;
  c.image_size = 8;
  auto ds = dataio::synthesize_dataset(c).dataset;
  train::TrainConfig base;
  base.batch_size = 4;
  base.epochs = 1;
  base.eeg_encoder.temporal_kernel = 5;
  base.eeg_encoder.features = 4;
  base.image_source.output_dim = 16;
  base.eval.n_way = 3;
  base.eval.repeats = 1;
  auto t = ablation_sweep(base, ds, SweepAxis::fusion_k, {"1", "2", "4"}, {1, 2});
  EXPECT_EQ(t.rows.size(), 3u);
  EXPECT_EQ(t.runs.size(), 6u);
  for (const auto& row : t.rows) EXPECT_EQ(row.seeds, 2u);
  const std::string csv = t.to_csv();
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "axis,value,seeds,top1_mean,top1_std,top5_mean,top5_std");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
  const std::string runs = t.runs_csv();
  EXPECT_EQ(std::count(runs.begin(), runs.end(), '\n'), 7);
}

TEST(Sweep, VanillaRunsInPixelMode) {
  dataio::SynthConfig c;
  c.train_concepts = 4;
  c.images_per_concept = 2;
  c.test_concepts = 3;
  c.eeg_channels = 4;
  c.eeg_samples = 24;
  c.latent_dim = 4;
  c.image_size = 8;
  auto ds = dataio::synthesize_dataset(c).dataset;
  train::TrainConfig base;
  base.batch_size = 4;
  base.epochs = 1;
  base.eeg_encoder.temporal_kernel = 5;
  base.image_source.output_dim = 16;
  base.eval.n_way = 3;
  base.eval.repeats = 1;
  EXPECT_EQ(ablation_sweep(base, ds, SweepAxis::loss_variant, {"vanilla"}, {1}).runs.size(), 1u);
}

TEST(Sweep, LossVariantAxisCoversAllFour) {
  train::TrainConfig base;
  for (const char* v : {"plain", "sym", "inv_asym", "asym"})
    EXPECT_EQ(to_string(apply_axis(base, SweepAxis::loss_variant, v).loss.variant), v);
}

}  // namespace
}  // namespace brainalign::evalkit
