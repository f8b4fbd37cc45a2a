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
#include <filesystem>
#include <vector>

#include "brainalign/tensor/tensor.hpp"

namespace brainalign::dataio {

// 8-bit PNG from a [C, H, W] tensor in [0, 1] (C = 1 gray, C = 3 RGB).
// Values are clamped and rounded to the nearest of 256 levels.
void write_png(const std::filesystem::path& path, const Tensor& image);

// Reads an 8-bit gray or RGB PNG as [C, H, W] with values v / 255.
Tensor read_png(const std::filesystem::path& path, DType dtype = DType::f32);

}  // namespace brainalign::dataio
