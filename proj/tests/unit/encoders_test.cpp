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

#include <random>

#include <gtest/gtest.h>

#include "brainalign/dataio/synth.hpp"
#include "brainalign/encoders/eeg_encoder.hpp"
#include "brainalign/encoders/image_source.hpp"
#include "brainalign/error.hpp"
#include "brainalign/tensor/gradcheck.hpp"
#include "brainalign/tensor/ops.hpp"

namespace brainalign::encoders {
namespace {

Tensor randn(Shape shape, std::uint64_t seed, DType dtype = DType::f64) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d;
  std::vector<double> v(numel(shape));
  for (double& x : v) x = d(rng);
  return Tensor::from_values(v, std::move(shape), dtype);
}

TEST(EegEncoder, TsconvOutputShape) {
  EEGEncoder enc({}, 16, 48, 1);
  EXPECT_EQ(enc.forward(randn({4, 16, 48}, 2, DType::f32)).shape(), (Shape{4, 64}));
}

TEST(EegEncoder, MlpOutputShape) {
  EEGEncoderConfig c;
  c.kind = EEGEncoderKind::mlp;
  c.hidden = {32, 16};
  c.output_dim = 8;
  EEGEncoder enc(c, 3, 10, 1);
  EXPECT_EQ(enc.forward(randn({5, 3, 10}, 2, DType::f32)).shape(), (Shape{5, 8}));
}

TEST(EegEncoder, ZeroHeadGivesZeroEmbeddings) {
  EEGEncoder enc({}, 4, 30, 3);
  auto& params = enc.parameters();
  for (std::size_t i = params.size() - 2; i < params.size(); ++i)
    for (float& v : params[i].second.mutable_values<float>()) v = 0.0f;
  for (double v : enc.forward(randn({2, 4, 30}, 4, DType::f32)).to_vector()) EXPECT_EQ(v, 0.0);
}

TEST(EegEncoder, ShortTrialRejected) {
  EXPECT_THROW(EEGEncoder({}, 4, 10, 1), ContractError);  // temporal kernel 13
}

TEST(EegEncoder, DeterministicIncludingDropout) {
  EEGEncoderConfig c;
  c.dropout = 0.3;
  EEGEncoder a(c, 4, 32, 9), b(c, 4, 32, 9);
  Tensor x = randn({3, 4, 32}, 5, DType::f32);
  EXPECT_EQ(a.forward(x, true, 77).to_vector(), b.forward(x, true, 77).to_vector());
  EXPECT_EQ(a.forward(x).to_vector(), b.forward(x).to_vector());
  EXPECT_NE(a.forward(x, true, 77).to_vector(), a.forward(x, true, 78).to_vector());
}

TEST(EegEncoder, FullPathGradcheck) {
  EEGEncoderConfig c;
  c.temporal_kernel = 3;
  c.features = 2;
  c.pool = 2;
  c.output_dim = 3;
  EEGEncoder enc(c, 2, 8, 4, DType::f64);
  std::vector<Tensor> inputs{randn({2, 2, 8}, 6)};
  for (auto& [name, t] : enc.parameters()) inputs.push_back(t);
  Tensor probe = randn({2, 3}, 7);
  auto r = gradcheck(
      [&](const std::vector<Tensor>& in) {
        auto& p = enc.parameters();
        for (std::size_t i = 0; i < p.size(); ++i) p[i].second = in[i + 1];
        return sum(mul(enc.forward(in[0]), probe));
      },
      inputs);
  EXPECT_LT(r.max_rel_error, 1e-5);
}

TEST(ReferenceEncoder, FrozenAndDeterministic) {
  ReferenceImageEncoder enc({}, 3, 16, 16);
  Tensor img = Tensor::full({2, 3, 16, 16}, 0.3, DType::f32);
  Tensor a = enc.encode(img), b = enc.encode(img);
  EXPECT_EQ(a.shape(), (Shape{2, 128}));
  EXPECT_EQ(a.to_vector(), b.to_vector());
  for (const auto& [name, t] : enc.parameters()) EXPECT_FALSE(t.requires_grad()) << name;
  EXPECT_FALSE(a.requires_grad());
  const auto sum_before = enc.checksum();
  enc.encode(img);
  EXPECT_EQ(enc.checksum(), sum_before);
}

TEST(ReferenceEncoder, GridNotDividingFeatureMap) {
  // 8x8 image -> 3x3 feature map -> 2x2 grid of overlapping windows.
  ImageSourceConfig c;
  c.output_dim = 5;
  for (std::size_t size : {7u, 8u, 9u, 16u, 17u}) {
    ReferenceImageEncoder enc(c, 3, size, size);
    EXPECT_EQ(enc.encode(Tensor::full({2, 3, size, size}, 0.5)).shape(), (Shape{2, 5})) << size;
  }
}

TEST(ReferenceEncoder, SameConfigSameWeights) {
  ImageSourceConfig c;
  c.seed = 5;
  ReferenceImageEncoder a(c, 3, 8, 8), b(c, 3, 8, 8);
  EXPECT_EQ(a.checksum(), b.checksum());
  c.seed = 6;
  EXPECT_NE(ReferenceImageEncoder(c, 3, 8, 8).checksum(), a.checksum());
}

TEST(FuseViews, Cases) {
  Tensor one = randn({2, 3}, 1);
  std::vector<Tensor> single{one};
  EXPECT_EQ(fuse_views(single).to_vector(), one.to_vector());

  std::vector<Tensor> pair{Tensor::from_values({1, 0}, {1, 2}, DType::f64),
                           Tensor::from_values({0, 1}, {1, 2}, DType::f64)};
  EXPECT_EQ(fuse_views(pair).to_vector(), (std::vector<double>{0.5, 0.5}));

  Tensor v = Tensor::from_values({0.1, 0.7, -3.3}, {1, 3}, DType::f64);
  std::vector<Tensor> same{v, v, v};
  EXPECT_EQ(fuse_views(same).to_vector(), v.to_vector());

  EXPECT_THROW(fuse_views(std::span<const Tensor>{}), ContractError);
}

TEST(FuseViews, StackedFormMatchesList) {
  std::vector<Tensor> views{randn({4, 5}, 1), randn({4, 5}, 2), randn({4, 5}, 3)};
  EXPECT_EQ(fuse_views(stack(views)).to_vector(), fuse_views(views).to_vector());
}

TEST(FuseViews, PermutationInvariant) {
  std::vector<Tensor> views{randn({4, 5}, 1), randn({4, 5}, 2), randn({4, 5}, 3)};
  std::vector<Tensor> perm{views[2], views[0], views[1]};
  auto a = fuse_views(views).to_vector(), b = fuse_views(perm).to_vector();
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-15);
}

TEST(EmbeddingFiles, GatherReturnsStoredRows) {
  dataio::SynthConfig c;
  c.train_concepts = 3;
  c.test_concepts = 2;
  c.views = 2;
  c.pixels = false;
  auto ds = dataio::synthesize_dataset(c).dataset;
  std::vector<std::size_t> rows{4, 0};
  Tensor g = gather_view_embeddings(ds, rows, 2);
  ASSERT_EQ(g.shape(), (Shape{2, 2, 64}));
  auto gv = g.to_vector();
  auto t1 = ds.view_embeddings[1].to_vector();
  for (std::size_t d = 0; d < 64; ++d) {
    EXPECT_EQ(gv[(1 * 2 + 0) * 64 + d], t1[4 * 64 + d]);
    EXPECT_EQ(gv[(1 * 2 + 1) * 64 + d], t1[0 * 64 + d]);
  }
  EXPECT_THROW(gather_view_embeddings(ds, rows, 3), ContractError);
}

}  // namespace
}  // namespace brainalign::encoders
