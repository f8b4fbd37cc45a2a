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
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "brainalign/tensor/tensor.hpp"

// Binary tensor container, little-endian throughout:
//
//   offset  size      field
//   0       4         magic "NBTF"
//   4       4         version (u32) = 1
//   8       1         dtype code (1 = f32, 2 = f64)
//   9       1         ndim (u8)
//   10      8*ndim    dims (u64 each)
//   ...     n*size    row-major payload
//
// A zero-dimensional container holds a single scalar.
namespace brainalign::dataio {

inline constexpr std::uint32_t kContainerVersion = 1;

std::vector<std::uint8_t> encode_container(const Tensor& tensor);
// Decodes exactly one container occupying all of `bytes`. base_offset is
// added to byte offsets reported in FormatError.
Tensor decode_container(std::span<const std::uint8_t> bytes, std::uint64_t base_offset = 0);

void write_container(const std::filesystem::path& path, const Tensor& tensor);
Tensor read_container(const std::filesystem::path& path);

// Named tensors plus a JSON metadata document in one file:
//
//   "NBTA" | u32 version = 1 | u64 index length | index JSON | containers...
//
// The index is {"meta": <document>, "tensors": [{"name", "offset", "length"}]}
// with offsets relative to the first byte after the index.
struct Archive {
  nlohmann::json meta;
  std::vector<std::pair<std::string, Tensor>> tensors;

  const Tensor& at(const std::string& name) const;
  bool contains(const std::string& name) const;
};

void write_archive(const std::filesystem::path& path, const Archive& archive);
Archive read_archive(const std::filesystem::path& path);

// Writes bytes to a sibling temp file and renames it over path.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> read_file(const std::filesystem::path& path);

}  // namespace brainalign::dataio
