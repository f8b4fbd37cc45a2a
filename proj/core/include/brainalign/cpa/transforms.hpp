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
#include <variant>

#include "brainalign/tensor/tensor.hpp"

// Seeded image and EEG transforms. Every transform has an identity point
// (sigma 0, factor 1, cell 1, window 1, ...) at which it returns its input
// bit for bit.
namespace brainalign::cpa {

struct GaussianBlur {
  double sigma = 1.0;  // kernel width 2*ceil(2*sigma)+1
};
struct GaussianNoise {
  double sigma = 0.05;
};
// Nearest-neighbour downscale by `factor`, then nearest-neighbour back up.
struct LowResolution {
  std::size_t factor = 4;
};
// Every cell x cell block replaced by its mean.
struct Mosaic {
  std::size_t cell = 8;
};
// Multiplicative brightness in [1-b, 1+b], contrast around the mean luma in [1-c, 1+c].
struct ColorJitter {
  double brightness = 0.2;
  double contrast = 0.2;
};
// Blend towards luma (0.299 R + 0.587 G + 0.114 B; channel mean otherwise).
struct Grayscale {
  double strength = 1.0;
};
// Random crop covering `fraction` of each side, resized back by nearest neighbour.
struct RandomCrop {
  double fraction = 0.8;
};

using ImageTransformSpec =
    std::variant<GaussianBlur, GaussianNoise, LowResolution, Mosaic, ColorJitter, Grayscale, RandomCrop>;

// Each channel zeroed independently with probability p.
struct ChannelDropout {
  double p = 0.1;
};
// Gaussian noise with per-channel sigma = relative_sigma * channel std.
struct NoiseAddition {
  double relative_sigma = 0.1;
};
// Centred moving average, reflect padding. Window must be odd.
struct Smoothing {
  std::size_t window = 5;
};
// Shift by a uniform integer in [-max_shift, max_shift], zero fill.
struct TemporalShift {
  std::size_t max_shift = 10;
};

using EEGTransformSpec = std::variant<ChannelDropout, NoiseAddition, Smoothing, TemporalShift>;

// Parameter range checks; throw ContractError.
void validate(const ImageTransformSpec& spec);
void validate(const EEGTransformSpec& spec, std::size_t samples = 0);

std::string kind_name(const ImageTransformSpec& spec);
std::string kind_name(const EEGTransformSpec& spec);

// image: [C, H, W] with values in [0, 1]. Output has the same shape and
// dtype and is clamped to [0, 1].
Tensor apply_image(const ImageTransformSpec& spec, const Tensor& image, std::uint64_t seed);
// trial: [C, T].
Tensor apply_eeg(const EEGTransformSpec& spec, const Tensor& trial, std::uint64_t seed);

// Buffer-level kernels used by the batch paths.
void apply_image_inplace(const ImageTransformSpec& spec, std::vector<double>& pixels, std::size_t channels,
                         std::size_t height, std::size_t width, std::uint64_t seed);
void apply_eeg_inplace(const EEGTransformSpec& spec, std::vector<double>& samples, std::size_t channels,
                       std::size_t length, std::uint64_t seed);

}  // namespace brainalign::cpa
