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
#include <utility>
#include <vector>

#include "brainalign/tensor/tensor.hpp"

namespace brainalign::encoders {

enum class EEGEncoderKind { tsconv, mlp };

std::string to_string(EEGEncoderKind kind);
EEGEncoderKind parse_eeg_encoder_kind(const std::string& name);

struct EEGEncoderConfig {
  EEGEncoderKind kind = EEGEncoderKind::tsconv;
  // tsconv
  std::size_t temporal_kernel = 13;
  std::size_t features = 16;
  std::size_t pool = 4;
  // mlp
  std::vector<std::size_t> hidden = {256};
  std::size_t output_dim = 64;
  double dropout = 0.0;
};

using NamedTensors = std::vector<std::pair<std::string, Tensor>>;

// Trainable EEG encoder over [B, C_E, T] trials.
//
// tsconv: temporal conv (1 x k) -> bias -> ELU -> average pool over time
//         -> spatial conv (C_E x 1) -> bias -> ELU -> dropout -> flatten -> linear
// mlp:    flatten -> (linear -> GELU -> dropout)* -> linear
//
// No batch normalization. Weights are drawn uniform in +-1/sqrt(fan_in).
class EEGEncoder {
 public:
  EEGEncoder(EEGEncoderConfig config, std::size_t channels, std::size_t samples, std::uint64_t seed,
             DType dtype = DType::f32);

  // training toggles dropout; dropout_seed keys its mask.
  Tensor forward(const Tensor& eeg, bool training = false, std::uint64_t dropout_seed = 0) const;

  const EEGEncoderConfig& config() const { return config_; }
  std::size_t channels() const { return channels_; }
  std::size_t samples() const { return samples_; }
  std::size_t output_dim() const { return config_.output_dim; }

  // Trainable tensors in a fixed order with stable names.
  const NamedTensors& parameters() const { return params_; }
  NamedTensors& parameters() { return params_; }

 private:
  const Tensor& param(std::size_t i) const { return params_[i].second; }

  EEGEncoderConfig config_;
  std::size_t channels_, samples_;
  NamedTensors params_;
};

}  // namespace brainalign::encoders
