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

#include <bit>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include <gtest/gtest.h>

#include "brainalign/dataio/container.hpp"
#include "brainalign/dataio/dataset.hpp"
#include "brainalign/dataio/image_io.hpp"
#include "brainalign/dataio/preprocess.hpp"
#include "brainalign/dataio/synth.hpp"
#include "brainalign/error.hpp"
#include "oracles.hpp"
#include "scratch_dir.hpp"

namespace brainalign::dataio {
namespace {

using testing::ScratchDir;

std::vector<double> bits_of(const Tensor& t) { return t.to_vector(); }

Tensor random_tensor(Shape shape, DType dtype, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d(0, 3);
  std::vector<double> v(numel(shape));
  for (double& x : v) x = d(rng);
  return Tensor::from_values(v, std::move(shape), dtype);
}

TEST(Container, WriteReadKnownValues) {
  ScratchDir dir;
  Tensor t = Tensor::from_values({1.0, 2.5, -3.0}, {1, 3}, DType::f32);
  write_container(dir / "t.nbtf", t);
  Tensor r = read_container(dir / "t.nbtf");
  EXPECT_EQ(r.shape(), t.shape());
  EXPECT_EQ(r.dtype(), DType::f32);
  auto a = t.values<float>(), b = r.values<float>();
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(std::bit_cast<std::uint32_t>(a[i]), std::bit_cast<std::uint32_t>(b[i]));
}

TEST(Container, HeaderLayout) {
  auto bytes = encode_container(Tensor::from_values({1.0}, {1}, DType::f64));
  ASSERT_EQ(bytes.size(), 4u + 4 + 1 + 1 + 8 + 8);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "NBTF");
  EXPECT_EQ(bytes[4], 1);  // version, little-endian
  EXPECT_EQ(bytes[5] | bytes[6] | bytes[7], 0);
  EXPECT_EQ(bytes[8], 2);  // f64
  EXPECT_EQ(bytes[9], 1);  // ndim
  EXPECT_EQ(bytes[10], 1);
  // 1.0 = 0x3ff0000000000000, little-endian: last byte 0x3f.
  EXPECT_EQ(bytes[25], 0x3f);
  EXPECT_EQ(bytes[24], 0xf0);
}

TEST(Container, ScalarRoundTrip) {
  Tensor s = Tensor::scalar(-0.125, DType::f64);
  Tensor r = decode_container(encode_container(s));
  EXPECT_EQ(r.ndim(), 0u);
  EXPECT_EQ(r.item(), -0.125);
}

TEST(Container, TruncatedPayloadReportsOffset) {
  auto bytes = encode_container(Tensor::from_values({1, 2, 3}, {3}, DType::f32));
  bytes.pop_back();
  try {
    decode_container(bytes);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_EQ(e.offset(), 18u);  // payload start
  }
}

TEST(Container, BadMagicAndDtype) {
  auto bytes = encode_container(Tensor::zeros({2}));
  auto bad = bytes;
  bad[0] = 'X';
  EXPECT_THROW(decode_container(bad), FormatError);
  bad = bytes;
  bad[8] = 7;
  try {
    decode_container(bad);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_EQ(e.offset(), 8u);
  }
  bytes.push_back(0);
  EXPECT_THROW(decode_container(bytes), FormatError);
}

TEST(Container, MissingFileIsIoError) {
  EXPECT_THROW(read_container("/nonexistent/x.nbtf"), IoError);
}

TEST(Container, PropertyRoundTripCorpus) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> rank(0, 4), dim(1, 5);
  for (int i = 0; i < 200; ++i) {
    Shape s(static_cast<std::size_t>(rank(rng)));
    for (auto& d : s) d = static_cast<std::size_t>(dim(rng));
    const DType dt = i % 2 ? DType::f32 : DType::f64;
    Tensor t = random_tensor(s, dt, rng());
    auto bytes = encode_container(t);
    Tensor r = decode_container(bytes);
    ASSERT_EQ(r.shape(), t.shape());
    ASSERT_EQ(r.dtype(), t.dtype());
    ASSERT_EQ(encode_container(r), bytes);
  }
}

TEST(Archive, RoundTripWithMeta) {
  ScratchDir dir;
  Archive a;
  a.meta = {{"k", 3}, {"name", "x"}};
  a.tensors.emplace_back("w", random_tensor({2, 3}, DType::f32, 1));
  a.tensors.emplace_back("b", random_tensor({3}, DType::f64, 2));
  write_archive(dir / "a.nbta", a);
  Archive r = read_archive(dir / "a.nbta");
  EXPECT_EQ(r.meta, a.meta);
  ASSERT_EQ(r.tensors.size(), 2u);
  EXPECT_EQ(bits_of(r.at("w")), bits_of(a.at("w")));
  EXPECT_EQ(r.at("b").dtype(), DType::f64);
  EXPECT_THROW(r.at("missing"), ContractError);
}

TEST(Archive, TruncationIsFormatError) {
  ScratchDir dir;
  Archive a;
  a.tensors.emplace_back("w", Tensor::zeros({4}));
  write_archive(dir / "a.nbta", a);
  auto bytes = read_file(dir / "a.nbta");
  bytes.resize(bytes.size() - 3);
  write_file_atomic(dir / "b.nbta", bytes);
  EXPECT_THROW(read_archive(dir / "b.nbta"), FormatError);
}

TEST(Baseline, ConstantChannelGoesToZero) {
  Tensor x = Tensor::full({2, 10}, 3.0, DType::f64);
  for (double v : baseline_correct(x, 4, 4).to_vector()) EXPECT_EQ(v, 0.0);
}

TEST(Baseline, HandExample) {
  Tensor x = Tensor::from_values({1, 3, 5, 5}, {1, 4}, DType::f64);
  EXPECT_EQ(baseline_correct(x, 2, 2).to_vector(), (std::vector<double>{3, 3}));
}

TEST(Baseline, RecomputedWindowMeanIsZero) {
  // Baseline = post samples themselves: pre segment duplicated from post.
  std::mt19937_64 rng(3);
  std::normal_distribution<double> d(5, 2);
  const std::size_t pre = 8, post = 8;
  std::vector<double> v(3 * (pre + post));
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t s = 0; s < pre; ++s) v[c * 16 + s] = v[c * 16 + pre + s] = d(rng);
  auto y = baseline_correct(Tensor::from_values(v, {3, 16}, DType::f64), pre, pre).to_vector();
  for (std::size_t c = 0; c < 3; ++c) {
    double m = 0;
    for (std::size_t s = 0; s < post; ++s) m += y[c * post + s];
    EXPECT_NEAR(m / post, 0.0, 1e-6);
  }
}

TEST(Baseline, WindowTooLong) { EXPECT_THROW(baseline_correct(Tensor::zeros({2, 10}), 3, 4), ContractError); }

TEST(Downsample, Cases) {
  Tensor x = Tensor::from_values({1, 2, 3, 4}, {1, 4}, DType::f64);
  EXPECT_EQ(downsample(x, 1).to_vector(), x.to_vector());
  EXPECT_EQ(downsample(x, 2).to_vector(), (std::vector<double>{1.5, 3.5}));
  EXPECT_EQ(downsample(Tensor::zeros({2, 1000}), 4).shape(), (Shape{2, 250}));
  EXPECT_EQ(downsample(Tensor::zeros({1, 7}), 3).shape(), (Shape{1, 2}));  // remainder dropped
  EXPECT_THROW(downsample(x, 0), ContractError);
}

Tensor white_noise(std::size_t n, std::size_t c, std::size_t t, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d;
  std::vector<double> v(n * c * t);
  for (double& x : v) x = d(rng);
  return Tensor::from_values(v, {n, c, t}, DType::f64);
}

// [N, C, T] trials whose pooled empirical covariance is exactly I,
// produced by whitening random samples with an Eigen eigendecomposition.
Tensor exactly_white(std::size_t n, std::size_t c, std::size_t t, std::uint64_t seed) {
  auto x = white_noise(n, c, t, seed);
  const auto cov = testing::channel_covariance(x);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  const Eigen::MatrixXd w = es.eigenvectors() * es.eigenvalues().cwiseInverse().cwiseSqrt().asDiagonal() *
                            es.eigenvectors().transpose();
  auto v = x.to_vector();
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < t; ++k)
      for (std::size_t a = 0; a < c; ++a) {
        double acc = 0;
        for (std::size_t b = 0; b < c; ++b) acc += w(Eigen::Index(a), Eigen::Index(b)) * v[(i * c + b) * t + k];
        out[(i * c + a) * t + k] = acc;
      }
  return Tensor::from_values(out, x.shape(), DType::f64);
}

TEST(Mvnn, UnitCovarianceDataGivesIdentity) {
  const std::size_t c = 4;
  Tensor x = exactly_white(4, c, 40, 1);  // N*T = 160 = 10 C^2
  auto w = testing::to_eigen(mvnn_whiten(x, 0.0).matrix);
  EXPECT_LT((w - Eigen::MatrixXd::Identity(c, c)).cwiseAbs().maxCoeff(), 1e-3);
}

TEST(Mvnn, RandomWhiteDataWithinSamplingError) {
  // W = cov^-1/2; entry error of a sample covariance is O(1/sqrt(n)).
  const std::size_t c = 4, n = 50, t = 200;
  auto w = testing::to_eigen(mvnn_whiten(white_noise(n, c, t, 2), 0.0).matrix);
  EXPECT_LT((w - Eigen::MatrixXd::Identity(c, c)).cwiseAbs().maxCoeff(), 5.0 / std::sqrt(double(n * t)));
}

TEST(Mvnn, FullShrinkageIsDiagonalInverseStd) {
  Tensor x = white_noise(20, 3, 50, 3);
  auto cov = testing::channel_covariance(x);
  auto w = testing::to_eigen(Whitening::fit(x, 1.0).matrix());
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      if (i == j) EXPECT_NEAR(w(i, j), 1.0 / std::sqrt(cov(i, i)), 1e-12);
      else EXPECT_NEAR(w(i, j), 0.0, 1e-12);
    }
}

TEST(Mvnn, WhitenedCovarianceIsIdentity) {
  // Correlated channels.
  Tensor x = white_noise(30, 5, 40, 4);
  auto v = x.to_vector();
  for (std::size_t i = 0; i < 30; ++i)
    for (std::size_t s = 0; s < 40; ++s) v[(i * 5 + 1) * 40 + s] += 0.9 * v[(i * 5 + 0) * 40 + s];
  auto r = mvnn_whiten(Tensor::from_values(v, x.shape(), DType::f64), 0.0);
  auto cov = testing::channel_covariance(r.trials);
  EXPECT_LT((cov - Eigen::MatrixXd::Identity(5, 5)).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Mvnn, RankDeficientIsNumericError) {
  Tensor x = white_noise(10, 3, 20, 5);
  auto v = x.to_vector();
  for (std::size_t i = 0; i < 10; ++i)
    for (std::size_t s = 0; s < 20; ++s) v[(i * 3 + 2) * 20 + s] = v[(i * 3 + 1) * 20 + s];
  EXPECT_THROW(mvnn_whiten(Tensor::from_values(v, x.shape(), DType::f64), 0.0), NumericError);
  EXPECT_NO_THROW(mvnn_whiten(Tensor::from_values(v, x.shape(), DType::f64), 0.5));
}

TEST(Mvnn, TooFewSamples) { EXPECT_THROW(mvnn_whiten(white_noise(1, 4, 3, 1), 0.1), ContractError); }

TEST(Average, IdentityAndHandCase) {
  Tensor x = Tensor::from_values({1, 1, 3, 3}, {2, 1, 2}, DType::f64);
  std::vector<std::int64_t> ids{5, 5};
  std::vector<std::int64_t> out_ids;
  EXPECT_EQ(average_repetitions(x, ids, 2, &out_ids).to_vector(), (std::vector<double>{2, 2}));
  EXPECT_EQ(out_ids, (std::vector<std::int64_t>{5}));
  std::vector<std::int64_t> distinct{1, 2};
  EXPECT_EQ(average_repetitions(x, distinct, 1).to_vector(), x.to_vector());
}

TEST(Average, RaggedGroupsNameTheStimulus) {
  Tensor x = Tensor::zeros({3, 1, 2});
  std::vector<std::int64_t> ids{4, 4, 9};
  try {
    average_repetitions(x, ids, 2);
    FAIL();
  } catch (const ContractError& e) {
    EXPECT_NE(std::string(e.what()).find("9 (1)"), std::string::npos);
  }
}

TEST(Average, NoiseVarianceShrinksByR) {
  const std::size_t trials = 1000, r = 4;
  std::mt19937_64 rng(6);
  std::normal_distribution<double> d(0, 1.5);
  std::vector<double> v(trials * r);
  std::vector<std::int64_t> ids;
  for (std::size_t i = 0; i < trials; ++i)
    for (std::size_t k = 0; k < r; ++k) {
      v[i * r + k] = 2.0 + d(rng);
      ids.push_back(std::int64_t(i));
    }
  auto y = average_repetitions(Tensor::from_values(v, {trials * r, 1, 1}, DType::f64), ids, r).to_vector();
  double var = 0;
  for (double s : y) var += (s - 2.0) * (s - 2.0);
  var /= double(trials);
  EXPECT_NEAR(var, 1.5 * 1.5 / r, 0.2 * 1.5 * 1.5 / r);
}

TEST(Preprocess, OrderStableForPerTrialOps) {
  RawTrialConfig rc{.repetitions = 2, .pre_samples = 6, .hold = 2, .offset_std = 1.0, .noise = 0.3, .seed = 1};
  auto a = simulate_raw_trials(white_noise(3, 2, 5, 7), rc);
  auto b = simulate_raw_trials(white_noise(2, 2, 5, 8), rc);
  for (auto& id : b.stimulus_ids) id += 100;
  PreprocessConfig pc{.pre_samples = 6, .baseline_window = 4, .downsample_factor = 2, .mvnn_enabled = false,
                      .repetitions = 2};
  std::vector<Tensor> parts{a.trials, b.trials};
  auto av = a.trials.to_vector(), bv = b.trials.to_vector();
  av.insert(av.end(), bv.begin(), bv.end());
  Shape s = a.trials.shape();
  s[0] += b.trials.dim(0);
  std::vector<std::int64_t> ids = a.stimulus_ids;
  ids.insert(ids.end(), b.stimulus_ids.begin(), b.stimulus_ids.end());
  auto joint = preprocess(Tensor::from_values(av, s, DType::f64), ids, pc).trials.to_vector();
  auto pa = preprocess(a.trials, a.stimulus_ids, pc).trials.to_vector();
  auto pb = preprocess(b.trials, b.stimulus_ids, pc).trials.to_vector();
  pa.insert(pa.end(), pb.begin(), pb.end());
  EXPECT_EQ(joint, pa);
}

TEST(Preprocess, FittedWhiteningIsReused) {
  RawTrialConfig rc{.repetitions = 1, .pre_samples = 4, .hold = 1, .offset_std = 0.5, .noise = 1.0, .seed = 2};
  auto tr = simulate_raw_trials(white_noise(30, 3, 20, 9), rc);
  PreprocessConfig pc{.pre_samples = 4, .baseline_window = 4};
  auto fit = preprocess(tr.trials, tr.stimulus_ids, pc);
  auto te = simulate_raw_trials(white_noise(5, 3, 20, 10), rc);
  const Whitening w = Whitening::fit(preprocess(tr.trials, tr.stimulus_ids, {.pre_samples = 4, .baseline_window = 4,
                                                                             .mvnn_enabled = false})
                                         .trials,
                                     pc.mvnn_shrinkage);
  auto applied = preprocess(te.trials, te.stimulus_ids, pc, &w);
  EXPECT_EQ(applied.whitening.to_vector(), fit.whitening.to_vector());
}

TEST(Synth, Deterministic) {
  SynthConfig c;
  c.views = 2;
  auto a = synthesize_dataset(c), b = synthesize_dataset(c);
  EXPECT_EQ(a.dataset.eeg.to_vector(), b.dataset.eeg.to_vector());
  EXPECT_EQ(a.dataset.images->to_vector(), b.dataset.images->to_vector());
  EXPECT_EQ(a.dataset.view_embeddings[1].to_vector(), b.dataset.view_embeddings[1].to_vector());
  c.seed = 43;
  EXPECT_NE(synthesize_dataset(c).dataset.eeg.to_vector(), a.dataset.eeg.to_vector());
}

TEST(Synth, ShapesAndSplits) {
  SynthConfig c;
  auto s = synthesize_dataset(c);
  const auto& ds = s.dataset;
  EXPECT_EQ(ds.size(), 50u * 8 + 20u);
  EXPECT_EQ(ds.eeg.shape(), (Shape{420, 16, 48}));
  EXPECT_EQ(ds.images->shape(), (Shape{420, 3, 16, 16}));
  EXPECT_TRUE(concept_overlap(ds.train_concepts, ds.test_concepts).empty());
  EXPECT_EQ(ds.indices(Split::test).size(), 20u);
  EXPECT_EQ(ds.concepts_in(Split::test), ds.test_concepts);
}

TEST(Synth, NoiselessIdentityMapsRecoverLatent) {
  SynthConfig c;
  c.identity_maps = true;
  c.latent_dim = c.eeg_channels = c.embed_dim = 8;
  c.eeg_noise = 0;
  c.views = 1;
  c.pixels = false;
  auto s = synthesize_dataset(c);
  auto eeg = s.dataset.eeg.to_vector();
  auto z = s.latents.to_vector();
  auto emb = s.dataset.view_embeddings[0].to_vector();
  const std::size_t T = c.eeg_samples;
  for (std::size_t i = 0; i < 10; ++i)
    for (std::size_t l = 0; l < 8; ++l) {
      EXPECT_FLOAT_EQ(float(eeg[(i * 8 + l) * T + 3]), float(z[i * 8 + l]));
      EXPECT_FLOAT_EQ(float(emb[i * 8 + l]), float(z[i * 8 + l]));
    }
}

TEST(Synth, ViewNoiseIsIndependentPerView) {
  SynthConfig c;
  c.views = 2;
  c.view_noise = 0.5;
  c.pixels = false;
  auto s = synthesize_dataset(c);
  EXPECT_NE(s.dataset.view_embeddings[0].to_vector(), s.dataset.view_embeddings[1].to_vector());
}

TEST(Synth, RejectsBadConfig) {
  SynthConfig c;
  c.eeg_noise = -1;
  EXPECT_THROW(synthesize_dataset(c), ContractError);
  c = {};
  c.pixels = false;
  EXPECT_THROW(synthesize_dataset(c), ContractError);
}

TEST(Dataset, SaveLoadRoundTrip) {
  ScratchDir dir;
  SynthConfig c;
  c.views = 2;
  c.train_concepts = 4;
  c.test_concepts = 2;
  auto s = synthesize_dataset(c);
  auto path = save_dataset(dir / "d", s.dataset);
  auto ds = load_dataset(path);
  EXPECT_EQ(ds.eeg.to_vector(), s.dataset.eeg.to_vector());
  EXPECT_EQ(ds.images->to_vector(), s.dataset.images->to_vector());
  EXPECT_EQ(ds.view_embeddings.size(), 2u);
  EXPECT_EQ(ds.concept_ids, s.dataset.concept_ids);
  EXPECT_EQ(ds.test_concepts, s.dataset.test_concepts);
}

TEST(Dataset, OverlapIsZeroShotViolation) {
  SynthConfig c;
  c.train_concepts = 3;
  c.test_concepts = 2;
  auto ds = synthesize_dataset(c).dataset;
  ds.test_concepts.push_back(ds.train_concepts[0]);
  EXPECT_THROW(ds.validate(), ZeroShotViolation);
}

TEST(Dataset, MissingViewFileNamesIndex) {
  ScratchDir dir;
  SynthConfig c;
  c.views = 2;
  c.train_concepts = 2;
  c.test_concepts = 2;
  auto path = save_dataset(dir / "d", synthesize_dataset(c).dataset);
  std::filesystem::remove(dir / "d" / "view_1.nbtf");
  try {
    load_dataset(path);
    FAIL();
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find("view 1"), std::string::npos);
  }
}

TEST(Dataset, MismatchedViewDims) {
  SynthConfig c;
  c.views = 2;
  c.train_concepts = 2;
  c.test_concepts = 2;
  auto ds = synthesize_dataset(c).dataset;
  ds.view_embeddings[1] = Tensor::zeros({ds.size(), 3});
  EXPECT_THROW(ds.validate(), DimensionError);
}

TEST(ImageIo, PngRoundTripQuantizes) {
  ScratchDir dir;
  std::vector<double> v(3 * 4 * 5);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = double(i * 4) / 255.0;
  Tensor img = Tensor::from_values(v, {3, 4, 5}, DType::f64);
  write_png(dir / "a.png", img);
  Tensor r = read_png(dir / "a.png", DType::f64);
  EXPECT_EQ(r.shape(), img.shape());
  auto rv = r.to_vector();
  for (std::size_t i = 0; i < v.size(); ++i) EXPECT_NEAR(rv[i], v[i], 1e-12);
}

TEST(ImageIo, GrayAndErrors) {
  ScratchDir dir;
  write_png(dir / "g.png", Tensor::full({1, 2, 2}, 0.5));
  EXPECT_EQ(read_png(dir / "g.png").shape(), (Shape{1, 2, 2}));
  EXPECT_THROW(write_png(dir / "bad.png", Tensor::zeros({2, 2, 2})), ContractError);
  std::ofstream(dir / "junk.png") << "not a png";
  EXPECT_THROW(read_png(dir / "junk.png"), IoError);
}

}  // namespace
}  // namespace brainalign::dataio
