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

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "brainalign/dataio/dataset.hpp"
#include "brainalign/encoders/eeg_encoder.hpp"

namespace brainalign::encoders {

enum class ImageSourceKind { reference_encoder, embedding_files };

std::string to_string(ImageSourceKind kind);
ImageSourceKind parse_image_source_kind(const std::string& name);

struct ImageSourceConfig {
  ImageSourceKind kind = ImageSourceKind::reference_encoder;
  // reference_encoder
  std::uint64_t seed = 1234;
  std::size_t conv_channels = 8;
  std::size_t pool_grid = 2;  // 1 = global average pool
  std::size_t output_dim = 128;
  // embedding_files: number of view tables fused (0 = all in the dataset)
  std::size_t views = 0;
};

// Frozen, untrained image feature extractor:
// conv 3x3 stride 2 -> ELU -> average pool to a grid x grid map -> flatten
// -> fixed random projection. Its tensors never require grad.
class ReferenceImageEncoder {
 public:
  ReferenceImageEncoder(const ImageSourceConfig& config, std::size_t channels, std::size_t height,
                        std::size_t width, DType dtype = DType::f32);

  // [B, C, H, W] -> [B, output_dim]
  Tensor encode(const Tensor& images) const;

  std::size_t output_dim() const { return projection_.dim(1); }
  const NamedTensors& parameters() const { return params_; }
  // FNV-1a over the raw parameter bytes; used by the freeze audit.
  std::uint64_t checksum() const;

 private:
  Tensor conv_, bias_, projection_;
  std::size_t grid_, pool_h_, pool_w_, stride_h_, stride_w_;
  NamedTensors params_;
};

// Mean over the view axis: [K, B, D] -> [B, D].
Tensor fuse_views(const Tensor& views);
// Same over a list of [B, D] views; throws ContractError when empty.
Tensor fuse_views(std::span<const Tensor> views);

// Rows of the first K view tables for the given pairs: [K, B, D].
Tensor gather_view_embeddings(const dataio::PairedDataset& dataset, std::span<const std::size_t> rows,
                              std::size_t views);

}  // namespace brainalign::encoders
