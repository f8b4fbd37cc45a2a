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
#include <optional>
#include <string>
#include <vector>

#include "brainalign/tensor/tensor.hpp"

namespace brainalign::dataio {

enum class Split { train, test };

// Aligned EEG-trial / image pairs. Pair i has EEG trial eeg[i], image
// images[i] (pixel mode) and/or row i of every view embedding table
// (precomputed-embedding mode), and concept concept_ids[i]. Train and test
// are concept partitions; a pair belongs to the split of its concept.
struct PairedDataset {
  Tensor eeg;                            // [N, C_E, T]
  std::optional<Tensor> images;          // [N, C_I, H, W], values in [0, 1]
  std::vector<Tensor> view_embeddings;   // K tables of [N, D]
  std::vector<std::int64_t> concept_ids; // N
  std::vector<std::int64_t> train_concepts;
  std::vector<std::int64_t> test_concepts;

  std::size_t size() const { return concept_ids.size(); }
  std::size_t eeg_channels() const { return eeg.dim(1); }
  std::size_t eeg_samples() const { return eeg.dim(2); }

  // Pair indices of a split, ascending.
  std::vector<std::size_t> indices(Split split) const;
  // Distinct concepts of the split's pairs, in order of first appearance.
  std::vector<std::int64_t> concepts_in(Split split) const;

  // Checks pair counts, shapes, pixel range and the zero-shot contract.
  // Throws ZeroShotViolation if the concept splits intersect.
  void validate() const;
};

// Sorted-set intersection of two concept lists.
std::vector<std::int64_t> concept_overlap(std::vector<std::int64_t> a, std::vector<std::int64_t> b);

struct ManifestInfo {
  double sampling_rate_hz = 250.0;
};

// Writes eeg.nbtf, images.nbtf, view_<k>.nbtf and manifest.json into dir.
// Returns the manifest path.
std::filesystem::path save_dataset(const std::filesystem::path& dir, const PairedDataset& dataset,
                                   const ManifestInfo& info = {});
// Loads and validates a dataset from its manifest. Container paths are
// resolved relative to the manifest's directory.
PairedDataset load_dataset(const std::filesystem::path& manifest_path);

}  // namespace brainalign::dataio
