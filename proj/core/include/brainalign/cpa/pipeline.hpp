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

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "brainalign/cpa/transforms.hpp"

namespace brainalign::cpa {

// Reserved view index for the EEG draw in the seed path.
inline constexpr std::uint64_t kEegView = 0xffffffffULL;

// K image transforms (one view each) and a single EEG transform.
struct AugmentationPipeline {
  std::vector<ImageTransformSpec> image;
  EEGTransformSpec eeg = Smoothing{};
  std::uint64_t master_seed = 42;

  std::size_t views() const { return image.size(); }
  void validate() const;

  // Seed for one (epoch, sample, view) draw.
  std::uint64_t seed_for(std::uint64_t epoch, std::uint64_t sample, std::uint64_t view) const;
};

// Blur, noise, low resolution and mosaic on images; smoothing on EEG.
AugmentationPipeline default_pipeline(std::uint64_t master_seed = 42);
// All seven image transforms in their canonical order (blur, noise,
// low resolution, mosaic, color jitter, grayscale, random crop).
std::vector<ImageTransformSpec> all_image_transforms();

// Text form, e.g.
//   image=gaussian_blur(sigma=1),mosaic(cell=8);eeg=smoothing(window=5)
// "default" alone gives default_pipeline(). A missing section keeps its
// default. Unknown kinds or keys throw ContractError.
AugmentationPipeline parse_pipeline(std::string_view text, std::uint64_t master_seed = 42);
std::string format_pipeline(const AugmentationPipeline& pipeline);

struct ViewBatch {
  std::vector<Tensor> image_views;  // K x [B, C, H, W]; empty without images
  Tensor eeg;                       // [B, C_E, T]
};

// Applies view k's transform to every image of the batch. sample_ids are
// the dataset indices of the batch rows; they key the random draws.
std::vector<Tensor> augment_images(const AugmentationPipeline& pipeline, const Tensor& images,
                                   std::span<const std::size_t> sample_ids, std::uint64_t epoch);
Tensor augment_eeg(const AugmentationPipeline& pipeline, const Tensor& eeg,
                   std::span<const std::size_t> sample_ids, std::uint64_t epoch);

// One EEG view and K image views per step.
ViewBatch make_views(const AugmentationPipeline& pipeline, const std::optional<Tensor>& images,
                     const Tensor& eeg, std::span<const std::size_t> sample_ids, std::uint64_t epoch);

}  // namespace brainalign::cpa
