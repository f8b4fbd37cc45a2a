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

#include "brainalign/encoders/eeg_encoder.hpp"

namespace brainalign::align {

// identity passes features through unchanged and has no parameters; it
// requires equal input and output dims.
enum class ProjectorKind { linear, mlp, identity };

std::string to_string(ProjectorKind kind);
ProjectorKind parse_projector_kind(const std::string& name);

struct ProjectorConfig {
  ProjectorKind kind = ProjectorKind::linear;
  std::size_t output_dim = 0;  // 0 = min(512, image feature dim)
  std::size_t hidden = 256;    // mlp only
};

// Shared output dim Z for the given image feature dim.
std::size_t resolve_output_dim(const ProjectorConfig& config, std::size_t image_dim);

// p(x) = x W + b, or W2 gelu(W1 x + b1) + b2 for mlp.
class Projector {
 public:
  Projector(const ProjectorConfig& config, std::size_t input_dim, std::size_t output_dim, std::uint64_t seed,
            DType dtype = DType::f32);

  Tensor forward(const Tensor& x) const;

  std::size_t input_dim() const { return input_dim_; }
  std::size_t output_dim() const { return output_dim_; }
  ProjectorKind kind() const { return kind_; }
  const encoders::NamedTensors& parameters() const { return params_; }
  encoders::NamedTensors& parameters() { return params_; }

 private:
  ProjectorKind kind_;
  std::size_t input_dim_, output_dim_;
  encoders::NamedTensors params_;
};

}  // namespace brainalign::align
