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

#include "brainalign/align/projector.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "brainalign/seed.hpp"
#include "brainalign/tensor/ops.hpp"

namespace brainalign::align {

std::string to_string(ProjectorKind kind) {
  switch (kind) {
    case ProjectorKind::linear: return "linear";
    case ProjectorKind::mlp: return "mlp";
    default: return "identity";
  }
}

ProjectorKind parse_projector_kind(const std::string& name) {
  if (name == "linear") return ProjectorKind::linear;
  if (name == "mlp") return ProjectorKind::mlp;
  if (name == "identity") return ProjectorKind::identity;
  throw ContractError("unknown projector kind '" + name + "' (expected linear, mlp or identity)");
}

std::size_t resolve_output_dim(const ProjectorConfig& config, std::size_t image_dim) {
  if (config.kind == ProjectorKind::identity) return image_dim;
  return config.output_dim ? config.output_dim : std::min<std::size_t>(512, image_dim);
}

namespace {

Tensor uniform(Shape shape, std::size_t fan_in, std::uint64_t seed, DType dtype) {
  std::mt19937_64 rng(seed);
  const double bound = 1.0 / std::sqrt(double(fan_in));
  std::uniform_real_distribution<double> u(-bound, bound);
  std::vector<double> v(numel(shape));
  for (double& x : v) x = u(rng);
  Tensor t = Tensor::from_values(v, std::move(shape), dtype);
  t.set_requires_grad();
  return t;
}

}  // namespace

Projector::Projector(const ProjectorConfig& config, std::size_t input_dim, std::size_t output_dim,
                     std::uint64_t seed, DType dtype)
    : kind_(config.kind), input_dim_(input_dim), output_dim_(output_dim) {
  if (input_dim == 0 || output_dim == 0) throw ContractError("projector: dims must be >= 1");
  switch (kind_) {
    case ProjectorKind::identity:
      if (input_dim != output_dim)
        throw DimensionError("identity projector needs equal dims, got " + std::to_string(input_dim) + " -> " +
                             std::to_string(output_dim));
      break;
    case ProjectorKind::linear:
      params_.emplace_back("weight", uniform({input_dim, output_dim}, input_dim, derive_seed({seed, 0}), dtype));
      params_.emplace_back("bias", uniform({output_dim}, input_dim, derive_seed({seed, 1}), dtype));
      break;
    case ProjectorKind::mlp:
      if (config.hidden == 0) throw ContractError("mlp projector: hidden size must be >= 1");
      params_.emplace_back("hidden.weight", uniform({input_dim, config.hidden}, input_dim, derive_seed({seed, 0}), dtype));
      params_.emplace_back("hidden.bias", uniform({config.hidden}, input_dim, derive_seed({seed, 1}), dtype));
      params_.emplace_back("out.weight", uniform({config.hidden, output_dim}, config.hidden, derive_seed({seed, 2}), dtype));
      params_.emplace_back("out.bias", uniform({output_dim}, config.hidden, derive_seed({seed, 3}), dtype));
      break;
  }
}

Tensor Projector::forward(const Tensor& x) const {
  if (x.ndim() != 2 || x.dim(1) != input_dim_)
    throw DimensionError("projector: expected [B, " + std::to_string(input_dim_) + "], got " +
                         brainalign::to_string(x.shape()));
  switch (kind_) {
    case ProjectorKind::identity: return x;
    case ProjectorKind::linear: return linear(x, params_[0].second, params_[1].second);
    default: return linear(gelu(linear(x, params_[0].second, params_[1].second)), params_[2].second, params_[3].second);
  }
}

}  // namespace brainalign::align
