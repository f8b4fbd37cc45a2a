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
#include <random>

#include <gtest/gtest.h>

#include "brainalign/cpa/pipeline.hpp"
#include "brainalign/cpa/transforms.hpp"
#include "brainalign/error.hpp"

namespace brainalign::cpa {
namespace {

Tensor random_image(std::size_t c, std::size_t h, std::size_t w, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<double> v(c * h * w);
  for (double& x : v) x = u(rng);
  return Tensor::from_values(v, {c, h, w}, DType::f64);
}

Tensor random_trial(std::size_t c, std::size_t t, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d(0, 2);
  std::vector<double> v(c * t);
  for (double& x : v) x = d(rng);
  return Tensor::from_values(v, {c, t}, DType::f64);
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) ma += a[i], mb += b[i];
  ma /= double(a.size());
  mb /= double(b.size());
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

TEST(ImageTransforms, IdentityParameterPoints) {
  const Tensor img = random_image(3, 12, 10, 1);
  const std::vector<ImageTransformSpec> identities{
      GaussianBlur{0.0}, GaussianNoise{0.0},     LowResolution{1}, Mosaic{1},
      ColorJitter{0.0, 0.0}, Grayscale{0.0},     RandomCrop{1.0}};
  for (const auto& spec : identities)
    EXPECT_EQ(apply_image(spec, img, 5).to_vector(), img.to_vector()) << kind_name(spec);
}

TEST(ImageTransforms, BlurOfConstantIsConstant) {
  const Tensor img = Tensor::full({3, 9, 9}, 0.4, DType::f64);
  for (double v : apply_image(GaussianBlur{1.5}, img, 1).to_vector()) EXPECT_NEAR(v, 0.4, 1e-12);
}

TEST(ImageTransforms, GrayscaleChannelsEqual) {
  const auto y = apply_image(Grayscale{1.0}, random_image(3, 6, 7, 2), 0).to_vector();
  const std::size_t plane = 42;
  for (std::size_t p = 0; p < plane; ++p) {
    EXPECT_EQ(y[p], y[plane + p]);
    EXPECT_EQ(y[p], y[2 * plane + p]);
  }
}

TEST(ImageTransforms, MosaicBlockMeans) {
  Tensor img = Tensor::from_values({0, 1, 0.5, 0.5}, {1, 2, 2}, DType::f64);
  for (double v : apply_image(Mosaic{2}, img, 0).to_vector()) EXPECT_DOUBLE_EQ(v, 0.5);
}

TEST(ImageTransforms, ShapeDtypeAndRangePreserved) {
  const Tensor img = random_image(3, 16, 16, 3).to(DType::f32);
  for (const auto& spec : all_image_transforms()) {
    Tensor y = apply_image(spec, img, 11);
    EXPECT_EQ(y.shape(), img.shape()) << kind_name(spec);
    EXPECT_EQ(y.dtype(), DType::f32);
    for (double v : y.to_vector()) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
    EXPECT_EQ(y.to_vector(), apply_image(spec, img, 11).to_vector());
  }
}

TEST(ImageTransforms, RejectsOutOfRange) {
  EXPECT_THROW(validate(ImageTransformSpec{GaussianBlur{-1}}), ContractError);
  EXPECT_THROW(validate(ImageTransformSpec{LowResolution{0}}), ContractError);
  EXPECT_THROW(validate(ImageTransformSpec{RandomCrop{0.0}}), ContractError);
  EXPECT_THROW(validate(ImageTransformSpec{RandomCrop{1.5}}), ContractError);
  EXPECT_THROW(apply_image(Mosaic{0}, random_image(1, 4, 4, 1), 0), ContractError);
}

TEST(EegTransforms, SmoothingConstantAndHandMean) {
  for (double v : apply_eeg(Smoothing{5}, Tensor::full({2, 12}, 2.0, DType::f64), 0).to_vector()) EXPECT_DOUBLE_EQ(v, 2.0);
  auto y = apply_eeg(Smoothing{3}, Tensor::from_values({0, 3, 0, 3, 0}, {1, 5}, DType::f64), 0).to_vector();
  for (std::size_t i = 1; i < 4; ++i) EXPECT_DOUBLE_EQ(y[i], i == 2 ? 2.0 : 1.0);
}

TEST(EegTransforms, IdentityParameterPoints) {
  const Tensor x = random_trial(4, 30, 1);
  const std::vector<EEGTransformSpec> identities{ChannelDropout{0.0}, NoiseAddition{0.0}, Smoothing{1},
                                                 TemporalShift{0}};
  for (const auto& spec : identities) EXPECT_EQ(apply_eeg(spec, x, 3).to_vector(), x.to_vector()) << kind_name(spec);
}

TEST(EegTransforms, FullDropoutZeroes) {
  for (double v : apply_eeg(ChannelDropout{1.0}, random_trial(5, 10, 2), 4).to_vector()) EXPECT_EQ(v, 0.0);
}

TEST(EegTransforms, ShiftZeroFillsVacatedEdge) {
  const Tensor x = Tensor::full({1, 20}, 1.0, DType::f64);
  bool saw_shift = false;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto y = apply_eeg(TemporalShift{3}, x, seed).to_vector();
    std::size_t zeros = 0;
    for (double v : y) zeros += v == 0.0;
    EXPECT_LE(zeros, 3u);
    // Zeros form one contiguous block at an edge.
    if (zeros) {
      saw_shift = true;
      EXPECT_TRUE((y.front() == 0.0) != (y.back() == 0.0));
    }
  }
  EXPECT_TRUE(saw_shift);
}

TEST(EegTransforms, RejectsBadParams) {
  EXPECT_THROW(validate(EEGTransformSpec{Smoothing{4}}), ContractError);
  EXPECT_THROW(validate(EEGTransformSpec{ChannelDropout{1.5}}), ContractError);
  EXPECT_THROW(apply_eeg(Smoothing{11}, random_trial(1, 5, 1), 0), ContractError);
  EXPECT_THROW(apply_eeg(TemporalShift{5}, random_trial(1, 5, 1), 0), ContractError);
}

TEST(Pipeline, DefaultMatchesAsymmetricDesign) {
  auto p = default_pipeline();
  ASSERT_EQ(p.views(), 4u);
  EXPECT_EQ(kind_name(p.image[0]), "gaussian_blur");
  EXPECT_EQ(kind_name(p.image[1]), "gaussian_noise");
  EXPECT_EQ(kind_name(p.image[2]), "low_resolution");
  EXPECT_EQ(kind_name(p.image[3]), "mosaic");
  EXPECT_EQ(kind_name(p.eeg), "smoothing");
}

TEST(Pipeline, ParseFormatRoundTrip) {
  auto p = parse_pipeline("image=mosaic(cell=2),gaussian_noise(sigma=0.1);eeg=temporal_shift(max_shift=3)", 9);
  EXPECT_EQ(p.views(), 2u);
  EXPECT_EQ(std::get<Mosaic>(p.image[0]).cell, 2u);
  EXPECT_EQ(std::get<TemporalShift>(p.eeg).max_shift, 3u);
  auto q = parse_pipeline(format_pipeline(p), 9);
  EXPECT_EQ(format_pipeline(q), format_pipeline(p));
  EXPECT_EQ(format_pipeline(parse_pipeline("default")), format_pipeline(default_pipeline()));
  EXPECT_THROW(parse_pipeline("image=sharpen()"), ContractError);
  EXPECT_THROW(parse_pipeline("image=mosaic(size=2)"), ContractError);
}

Tensor image_batch(std::size_t b, std::uint64_t seed) {
  std::vector<double> v;
  for (std::size_t i = 0; i < b; ++i) {
    auto x = random_image(3, 8, 8, seed + i).to_vector();
    v.insert(v.end(), x.begin(), x.end());
  }
  return Tensor::from_values(v, {b, 3, 8, 8}, DType::f64);
}

TEST(Pipeline, IdentityViewsEqualInputs) {
  AugmentationPipeline p{{Mosaic{1}}, Smoothing{1}, 1};
  Tensor imgs = image_batch(3, 1);
  Tensor eeg = Tensor::from_values(random_trial(3 * 2, 6, 2).to_vector(), {3, 2, 6}, DType::f64);
  std::vector<std::size_t> ids{0, 1, 2};
  auto v = make_views(p, imgs, eeg, ids, 0);
  ASSERT_EQ(v.image_views.size(), 1u);
  EXPECT_EQ(v.image_views[0].to_vector(), imgs.to_vector());
  EXPECT_EQ(v.eeg.to_vector(), eeg.to_vector());
}

TEST(Pipeline, DeterministicAndEpochDependent) {
  auto p = default_pipeline(7);
  Tensor imgs = image_batch(4, 3);
  std::vector<std::size_t> ids{5, 6, 7, 8};
  auto a = augment_images(p, imgs, ids, 2), b = augment_images(p, imgs, ids, 2), c = augment_images(p, imgs, ids, 3);
  for (std::size_t k = 0; k < a.size(); ++k) EXPECT_EQ(a[k].to_vector(), b[k].to_vector());
  EXPECT_NE(a[1].to_vector(), c[1].to_vector());  // gaussian noise redraws
}

TEST(Pipeline, SwapIndependence) {
  // A sample's views depend only on its own index, not on its batch mates.
  AugmentationPipeline p{{GaussianNoise{0.1}, RandomCrop{0.5}}, NoiseAddition{0.2}, 3};
  Tensor imgs = image_batch(3, 10);
  std::vector<std::size_t> ids{4, 9, 2};
  auto full = augment_images(p, imgs, ids, 1);
  const std::size_t stride = 3 * 8 * 8;
  const auto all = imgs.to_vector();
  Tensor lone = Tensor::from_values(std::vector<double>(all.begin() + stride, all.begin() + 2 * stride),
                                    {1, 3, 8, 8}, DType::f64);
  std::vector<std::size_t> one{9};
  auto single = augment_images(p, lone, one, 1);
  for (std::size_t k = 0; k < 2; ++k) {
    auto f = full[k].to_vector();
    EXPECT_EQ(std::vector<double>(f.begin() + stride, f.begin() + 2 * stride), single[k].to_vector());
  }
}

TEST(Pipeline, ViewNoiseDrawsUncorrelated) {
  // Mid-grey images so no clamping; residual noise of two views of the
  // same sample, 100 x 3 x 8 x 8 = 19200 pixels.
  AugmentationPipeline p{{GaussianNoise{0.05}, GaussianNoise{0.05}}, Smoothing{1}, 11};
  Tensor imgs = Tensor::full({100, 3, 8, 8}, 0.5, DType::f64);
  std::vector<std::size_t> ids(100);
  for (std::size_t i = 0; i < 100; ++i) ids[i] = i;
  auto v = augment_images(p, imgs, ids, 0);
  auto a = v[0].to_vector(), b = v[1].to_vector();
  EXPECT_LT(std::abs(pearson(a, b)), 0.1);
}

TEST(Pipeline, EmptyImageListRejected) {
  AugmentationPipeline p{{}, Smoothing{}, 1};
  EXPECT_THROW(p.validate(), ContractError);
}

}  // namespace
}  // namespace brainalign::cpa
