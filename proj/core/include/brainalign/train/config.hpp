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
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "brainalign/align/loss.hpp"
#include "brainalign/align/projector.hpp"
#include "brainalign/encoders/eeg_encoder.hpp"
#include "brainalign/encoders/image_source.hpp"
#include "brainalign/tensor/adamw.hpp"

namespace brainalign::train {

struct EvalSettings {
  std::size_t n_way = 20;
  std::vector<std::size_t> top_k = {1, 5};
  std::size_t repeats = 50;
  std::uint64_t seed = 0;
};

struct TrainConfig {
  std::size_t batch_size = 64;
  std::size_t epochs = 200;
  AdamWConfig optimizer;
  std::uint64_t seed = 42;
  DType dtype = DType::f32;

  // Augmentation. With cpa off every input is used as is and a single
  // image view is encoded.
  bool cpa = true;
  std::string pipeline = "default";

  encoders::EEGEncoderConfig eeg_encoder;
  encoders::ImageSourceConfig image_source;
  align::ProjectorConfig projector;
  align::LossConfig loss;

  std::size_t checkpoint_every = 0;  // epochs; 0 = final checkpoint only
  std::size_t eval_every = 0;        // epochs; 0 = never during training
  EvalSettings eval;
  bool log_wall_time = false;  // off keeps RunLog bytes reproducible

  void validate() const;
};

// Nested JSON document. Keys:
//   batch_size, epochs, seed, dtype,
//   optimizer.{lr, weight_decay, beta1, beta2, eps},
//   cpa.{enabled, pipeline},
//   eeg_encoder.{kind, temporal_kernel, features, pool, hidden, output_dim, dropout},
//   image_source.{kind, seed, conv_channels, pool_grid, output_dim, views},
//   projector.{kind, output_dim, hidden},
//   loss.{variant, temperature, learnable_tau, strict_negatives},
//   checkpoint_every, eval.{every, n_way, top_k, repeats, seed}, log.wall_time
nlohmann::json to_json(const TrainConfig& config);
// Missing keys keep their defaults; unknown keys throw ContractError.
TrainConfig config_from_json(const nlohmann::json& doc);
TrainConfig load_config(const std::string& path);

// Applies "dotted.key=value". The value is parsed as JSON when possible and
// taken as a string otherwise.
void apply_override(TrainConfig& config, std::string_view assignment);

// Hex FNV-1a digest of the canonical JSON form.
std::string config_digest(const TrainConfig& config);

}  // namespace brainalign::train
