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

#include <array>
#include <cstddef>
#include <optional>
#include <span>

#include <nlohmann/json.hpp>

#include "brainalign/align/loss.hpp"
#include "brainalign/align/projector.hpp"
#include "brainalign/cpa/pipeline.hpp"
#include "brainalign/dataio/dataset.hpp"
#include "brainalign/encoders/eeg_encoder.hpp"
#include "brainalign/encoders/image_source.hpp"
#include "brainalign/tensor/adamw.hpp"
#include "brainalign/train/config.hpp"

namespace brainalign::train {

// Input dimensions a model is built for.
struct DataShape {
  std::size_t eeg_channels = 0;
  std::size_t eeg_samples = 0;
  std::optional<std::array<std::size_t, 3>> image_shape;  // pixel mode
  std::size_t embed_dim = 0;                              // embedding mode
  std::size_t views = 0;                                  // stored view tables

  static DataShape of(const dataio::PairedDataset& dataset);
  nlohmann::json to_json() const;
  static DataShape from_json(const nlohmann::json& doc);
};

// f_E, the projectors p_I and p_E, the temperature, and the frozen f_I.
class Model {
 public:
  Model(const TrainConfig& config, const DataShape& shape);

  const TrainConfig& config() const { return config_; }
  const DataShape& shape() const { return shape_; }
  std::size_t image_feature_dim() const;
  // Image views fused per sample (K).
  std::size_t fused_views(const std::optional<cpa::AugmentationPipeline>& pipeline) const;

  // H_I for a batch. With a pipeline the K augmented views of each image
  // are encoded and averaged; without one clean inputs are used (pixel
  // mode) or the configured view tables fused (embedding mode).
  Tensor image_features(const dataio::PairedDataset& dataset, std::span<const std::size_t> rows,
                        const cpa::AugmentationPipeline* pipeline = nullptr, std::uint64_t epoch = 0) const;
  // H_E for an (already augmented) EEG batch.
  Tensor eeg_features(const Tensor& eeg, bool training = false, std::uint64_t dropout_seed = 0) const;

  Tensor project_image(const Tensor& features) const { return image_projector_.forward(features); }
  Tensor project_eeg(const Tensor& features) const { return eeg_projector_.forward(features); }

  const encoders::EEGEncoder& eeg_encoder() const { return eeg_encoder_; }
  const std::optional<encoders::ReferenceImageEncoder>& image_encoder() const { return image_encoder_; }
  const align::Temperature& temperature() const { return temperature_; }
  // Checksum of f_I (0 in embedding mode).
  std::uint64_t image_source_checksum() const;

  // Trainable tensors: "eeg_encoder.*", "image_projector.*",
  // "eeg_projector.*" and "loss.log_tau" when tau is learnable.
  encoders::NamedTensors named_parameters() const;
  // Optimizer groups; log tau is exempt from weight decay.
  std::vector<AdamW::Param> optimizer_params() const;

 private:
  TrainConfig config_;
  DataShape shape_;
  encoders::EEGEncoder eeg_encoder_;
  std::optional<encoders::ReferenceImageEncoder> image_encoder_;
  align::Projector image_projector_;
  align::Projector eeg_projector_;
  align::Temperature temperature_;
};

}  // namespace brainalign::train
