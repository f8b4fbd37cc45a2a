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
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "brainalign/tensor/tensor.hpp"

// Hand-off to the offline embedding extractor: augmented views are written
// as PNGs plus a manifest; the extractor answers with one container of
// [images, dim] rows per view.
namespace brainalign::dataio {

struct ExtractionManifest {
  std::filesystem::path image_dir;              // PNG paths below are relative to it
  std::vector<std::vector<std::string>> views;  // [view][image]
  std::string backbone = "RN50";
  std::vector<std::string> outputs;             // one container per view, relative to image_dir
  std::size_t batch_size = 64;

  std::size_t images() const { return views.empty() ? 0 : views.front().size(); }
  // Non-empty, rectangular, one output per view.
  void validate() const;
  nlohmann::json to_json() const;
  static ExtractionManifest from_json(const nlohmann::json& doc, const std::filesystem::path& image_dir);
};

// Embedding width of a known image backbone, nullopt for unknown names.
std::optional<std::size_t> backbone_embedding_dim(const std::string& backbone);

// Writes view_<k>/img_<i>.png for K stacked views [K, N, C, H, W] and
// dir/extract.json. Returns the manifest.
ExtractionManifest export_view_pngs(const std::filesystem::path& dir, const Tensor& views,
                                    const std::string& backbone = "RN50", std::size_t batch_size = 64);

ExtractionManifest read_extraction_manifest(const std::filesystem::path& path);

// Loads the extractor's containers. Row counts must equal the image count,
// dims must agree across views and match the backbone when it is known.
std::vector<Tensor> load_extracted_embeddings(const std::filesystem::path& manifest_path);

}  // namespace brainalign::dataio
