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

#include "brainalign/encoders/image_source.hpp"

#include <cmath>
#include <cstring>
#include <random>

#include "brainalign/seed.hpp"
#include "brainalign/tensor/ops.hpp"

namespace brainalign::encoders {

std::string to_string(ImageSourceKind kind) {
  return kind == ImageSourceKind::reference_encoder ? "reference_encoder" : "embedding_files";
}

ImageSourceKind parse_image_source_kind(const std::string& name) {
  if (name == "reference_encoder") return ImageSourceKind::reference_encoder;
  if (name == "embedding_files") return ImageSourceKind::embedding_files;
  throw ContractError("unknown image source '" + name + "' (expected reference_encoder or embedding_files)");
}

namespace {

Tensor gaussian(Shape shape, double stddev, std::uint64_t seed, DType dtype) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, stddev);
  std::vector<double> v(numel(shape));
  for (double& x : v) x = n(rng);
  return Tensor::from_values(v, std::move(shape), dtype);
}

}  // namespace

ReferenceImageEncoder::ReferenceImageEncoder(const ImageSourceConfig& config, std::size_t channels,
                                             std::size_t height, std::size_t width, DType dtype)
    : grid_(config.pool_grid) {
  if (config.conv_channels == 0 || config.output_dim == 0 || grid_ == 0)
    throw ContractError("reference encoder: conv_channels, output_dim and pool_grid must be >= 1");
  if (height < 3 || width < 3) throw DimensionError("reference encoder: images must be at least 3x3");
  const std::size_t ho = (height - 3) / 2 + 1, wo = (width - 3) / 2 + 1;
  if (grid_ > ho || grid_ > wo)
    throw ContractError("reference encoder: pool_grid " + std::to_string(grid_) + " exceeds the feature map " +
                        std::to_string(ho) + "x" + std::to_string(wo));
  // Exactly grid x grid windows spanning the whole map; they overlap when
  // the map size is not a multiple of the grid.
  stride_h_ = ho / grid_;
  stride_w_ = wo / grid_;
  pool_h_ = ho - (grid_ - 1) * stride_h_;
  pool_w_ = wo - (grid_ - 1) * stride_w_;
  const std::size_t F = config.conv_channels, fan_in = channels * 9, flat = F * grid_ * grid_;
  conv_ = gaussian({F, channels, 3, 3}, 1.0 / std::sqrt(double(fan_in)), derive_seed({config.seed, 0}), dtype);
  bias_ = gaussian({F}, 0.1, derive_seed({config.seed, 1}), dtype);
  projection_ = gaussian({flat, config.output_dim}, 1.0 / std::sqrt(double(flat)), derive_seed({config.seed, 2}), dtype);
  params_ = {{"conv.weight", conv_}, {"conv.bias", bias_}, {"projection", projection_}};
}

Tensor ReferenceImageEncoder::encode(const Tensor& images) const {
  if (images.ndim() != 4 || images.dim(1) != conv_.dim(1))
    throw DimensionError("reference encoder: expected [B, " + std::to_string(conv_.dim(1)) + ", H, W], got " +
                         brainalign::to_string(images.shape()));
  const Tensor x = images.dtype() == conv_.dtype() ? images : images.to(conv_.dtype());
  Tensor h = elu(add_bias(conv2d(x, conv_, {.stride_h = 2, .stride_w = 2}), bias_, 1));
  h = avg_pool2d(h, pool_h_, pool_w_, stride_h_, stride_w_);
  return matmul(flatten(h), projection_);
}

std::uint64_t ReferenceImageEncoder::checksum() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& [name, t] : params_) {
    visit_dtype(t.dtype(), [&]<class T>() {
      for (T v : t.values<T>()) {
        unsigned char bytes[sizeof(T)];
        std::memcpy(bytes, &v, sizeof(T));
        for (unsigned char b : bytes) h = (h ^ b) * 0x100000001b3ULL;
      }
    });
  }
  return h;
}

Tensor fuse_views(const Tensor& views) {
  if (views.ndim() != 3) throw DimensionError("fuse_views: expected [K, B, D], got " + brainalign::to_string(views.shape()));
  return mean(views, 0);
}

Tensor fuse_views(std::span<const Tensor> views) {
  if (views.empty()) throw ContractError("fuse_views: at least one view is required");
  return mean(stack(views), 0);
}

Tensor gather_view_embeddings(const dataio::PairedDataset& dataset, std::span<const std::size_t> rows,
                              std::size_t views) {
  if (dataset.view_embeddings.empty()) throw ContractError("dataset has no view embedding tables");
  if (views == 0) views = dataset.view_embeddings.size();
  if (views > dataset.view_embeddings.size())
    throw ContractError("requested " + std::to_string(views) + " fused views but the dataset has " +
                        std::to_string(dataset.view_embeddings.size()));
  std::vector<Tensor> parts;
  for (std::size_t k = 0; k < views; ++k) parts.push_back(gather_rows(dataset.view_embeddings[k], rows));
  return stack(parts);
}

}  // namespace brainalign::encoders
