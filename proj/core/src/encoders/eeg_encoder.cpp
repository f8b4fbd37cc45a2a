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

#include "brainalign/encoders/eeg_encoder.hpp"

#include <cmath>
#include <random>

#include "brainalign/seed.hpp"
#include "brainalign/tensor/ops.hpp"

namespace brainalign::encoders {

std::string to_string(EEGEncoderKind kind) { return kind == EEGEncoderKind::tsconv ? "tsconv" : "mlp"; }

EEGEncoderKind parse_eeg_encoder_kind(const std::string& name) {
  if (name == "tsconv") return EEGEncoderKind::tsconv;
  if (name == "mlp") return EEGEncoderKind::mlp;
  throw ContractError("unknown EEG encoder kind '" + name + "' (expected tsconv or mlp)");
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

EEGEncoder::EEGEncoder(EEGEncoderConfig config, std::size_t channels, std::size_t samples, std::uint64_t seed,
                       DType dtype)
    : config_(std::move(config)), channels_(channels), samples_(samples) {
  if (config_.output_dim == 0) throw ContractError("eeg encoder: output_dim must be >= 1");
  if (!(config_.dropout >= 0 && config_.dropout < 1)) throw ContractError("eeg encoder: dropout must be in [0, 1)");
  std::uint64_t tag = 0;
  auto add = [&](const std::string& name, Shape shape, std::size_t fan_in) {
    params_.emplace_back(name, uniform(std::move(shape), fan_in, derive_seed({seed, tag++}), dtype));
  };
  if (config_.kind == EEGEncoderKind::tsconv) {
    const std::size_t k = config_.temporal_kernel, F = config_.features, pool = config_.pool;
    if (k == 0 || F == 0 || pool == 0) throw ContractError("tsconv: kernel, features and pool must be >= 1");
    if (samples < k)
      throw ContractError("tsconv: trial length " + std::to_string(samples) + " is shorter than the temporal kernel " +
                          std::to_string(k));
    const std::size_t pooled = (samples - k + 1) / pool;
    if (pooled == 0) throw ContractError("tsconv: pool width exceeds the temporal conv output length");
    add("temporal.weight", {F, 1, 1, k}, k);
    add("temporal.bias", {F}, k);
    add("spatial.weight", {F, F, channels, 1}, F * channels);
    add("spatial.bias", {F}, F * channels);
    add("head.weight", {F * pooled, config_.output_dim}, F * pooled);
    add("head.bias", {config_.output_dim}, F * pooled);
  } else {
    std::size_t in = channels * samples;
    for (std::size_t i = 0; i < config_.hidden.size(); ++i) {
      if (config_.hidden[i] == 0) throw ContractError("mlp: hidden sizes must be >= 1");
      add("hidden" + std::to_string(i) + ".weight", {in, config_.hidden[i]}, in);
      add("hidden" + std::to_string(i) + ".bias", {config_.hidden[i]}, in);
      in = config_.hidden[i];
    }
    add("head.weight", {in, config_.output_dim}, in);
    add("head.bias", {config_.output_dim}, in);
  }
}

Tensor EEGEncoder::forward(const Tensor& eeg, bool training, std::uint64_t dropout_seed) const {
  if (eeg.ndim() != 3 || eeg.dim(1) != channels_ || eeg.dim(2) != samples_)
    throw DimensionError("eeg encoder: expected [B, " + std::to_string(channels_) + ", " + std::to_string(samples_) +
                         "], got " + brainalign::to_string(eeg.shape()));
  const std::size_t B = eeg.dim(0);
  if (config_.kind == EEGEncoderKind::tsconv) {
    Tensor h = reshape(eeg, {B, 1, channels_, samples_});
    h = elu(add_bias(conv2d(h, param(0)), param(1), 1));
    h = avg_pool2d(h, 1, config_.pool);
    h = elu(add_bias(conv2d(h, param(2)), param(3), 1));
    h = dropout(h, config_.dropout, dropout_seed, training);
    return linear(flatten(h), param(4), param(5));
  }
  Tensor h = flatten(eeg);
  for (std::size_t i = 0; i < config_.hidden.size(); ++i) {
    h = gelu(linear(h, param(2 * i), param(2 * i + 1)));
    h = dropout(h, config_.dropout, derive_seed({dropout_seed, i}), training);
  }
  return linear(h, param(params_.size() - 2), param(params_.size() - 1));
}

}  // namespace brainalign::encoders
