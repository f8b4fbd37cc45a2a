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

#include "brainalign/dataio/extraction.hpp"

#include <array>
#include <cstdio>
#include <fstream>
#include <string_view>

#include "brainalign/dataio/container.hpp"
#include "brainalign/dataio/image_io.hpp"

namespace brainalign::dataio {

using nlohmann::json;

namespace {

struct Backbone {
  std::string_view name;
  std::size_t dim;
};

// OpenCLIP image towers.
constexpr std::array<Backbone, 8> kBackbones{{
    {"RN50", 1024},
    {"RN101", 512},
    {"ViT-B-16", 512},
    {"ViT-B-32", 512},
    {"ViT-L-14", 768},
    {"ViT-H-14", 1024},
    {"ViT-g-14", 1024},
    {"ViT-bigG-14", 1280},
}};

void write_text(const std::filesystem::path& path, const std::string& text) {
  write_file_atomic(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

}  // namespace

std::optional<std::size_t> backbone_embedding_dim(const std::string& backbone) {
  for (const auto& b : kBackbones)
    if (b.name == backbone) return b.dim;
  return std::nullopt;
}

void ExtractionManifest::validate() const {
  if (views.empty()) throw ContractError("extraction manifest: no views");
  if (outputs.size() != views.size())
    throw ContractError("extraction manifest: " + std::to_string(outputs.size()) + " outputs for " +
                        std::to_string(views.size()) + " views");
  for (std::size_t k = 0; k < views.size(); ++k)
    if (views[k].empty() || views[k].size() != views[0].size())
      throw ContractError("extraction manifest: view " + std::to_string(k) + " lists " +
                          std::to_string(views[k].size()) + " images, expected " +
                          std::to_string(views[0].size()));
  if (batch_size == 0) throw ContractError("extraction manifest: batch_size must be >= 1");
}

json ExtractionManifest::to_json() const {
  return {{"format", "brainalign.extraction"},
          {"version", 1},
          {"image_dir", "."},
          {"backbone", backbone},
          {"batch_size", batch_size},
          {"views", views},
          {"outputs", outputs}};
}

ExtractionManifest ExtractionManifest::from_json(const json& doc, const std::filesystem::path& base) {
  ExtractionManifest m;
  try {
    if (doc.value("format", "") != "brainalign.extraction" || doc.value("version", 0) != 1)
      throw ContractError("extraction manifest: unsupported format/version");
    m.image_dir = base / doc.value("image_dir", ".");
    m.views = doc.at("views").get<std::vector<std::vector<std::string>>>();
    m.backbone = doc.value("backbone", "RN50");
    m.outputs = doc.at("outputs").get<std::vector<std::string>>();
    m.batch_size = doc.value("batch_size", std::size_t{64});
  } catch (const json::exception& e) {
    throw ContractError(std::string("extraction manifest: ") + e.what());
  }
  m.validate();
  return m;
}

ExtractionManifest export_view_pngs(const std::filesystem::path& dir, const Tensor& views,
                                    const std::string& backbone, std::size_t batch_size) {
  if (views.ndim() != 5) throw DimensionError("export_view_pngs: views must be [K, N, C, H, W], got " +
                                              to_string(views.shape()));
  const std::size_t K = views.dim(0), N = views.dim(1);
  const Shape image_shape(views.shape().begin() + 2, views.shape().end());
  const std::size_t stride = numel(image_shape);
  const std::vector<double> values = views.to_vector();

  ExtractionManifest m;
  m.image_dir = dir;
  m.backbone = backbone;
  m.batch_size = batch_size;
  std::filesystem::create_directories(dir);
  for (std::size_t k = 0; k < K; ++k) {
    const std::string sub = "view_" + std::to_string(k);
    std::filesystem::create_directories(dir / sub);
    std::vector<std::string> names;
    for (std::size_t i = 0; i < N; ++i) {
      char name[32];
      std::snprintf(name, sizeof name, "img_%06zu.png", i);
      const std::string rel = sub + "/" + name;
      const auto* first = values.data() + (k * N + i) * stride;
      write_png(dir / rel, Tensor::from_values(std::span(first, stride), image_shape, views.dtype()));
      names.push_back(rel);
    }
    m.views.push_back(std::move(names));
    m.outputs.push_back(sub + ".nbtf");
  }
  m.validate();
  write_text(dir / "extract.json", m.to_json().dump(2) + "\n");
  return m;
}

ExtractionManifest read_extraction_manifest(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open extraction manifest " + path.string());
  json doc;
  try {
    doc = json::parse(is);
  } catch (const json::exception& e) {
    throw ContractError("extraction manifest " + path.string() + ": " + e.what());
  }
  return ExtractionManifest::from_json(doc, path.parent_path());
}

std::vector<Tensor> load_extracted_embeddings(const std::filesystem::path& manifest_path) {
  const ExtractionManifest m = read_extraction_manifest(manifest_path);
  const auto expected_dim = backbone_embedding_dim(m.backbone);
  std::vector<Tensor> tables;
  for (std::size_t k = 0; k < m.outputs.size(); ++k) {
    const auto path = m.image_dir / m.outputs[k];
    if (!std::filesystem::exists(path))
      throw IoError("missing embedding file for view " + std::to_string(k) + ": " + path.string());
    Tensor t = read_container(path);
    if (t.ndim() != 2 || t.dim(0) != m.images())
      throw DimensionError("view " + std::to_string(k) + " embeddings must be [" + std::to_string(m.images()) +
                           ", D], got " + to_string(t.shape()));
    if (!tables.empty() && t.dim(1) != tables.front().dim(1))
      throw DimensionError("view " + std::to_string(k) + " has embedding dim " + std::to_string(t.dim(1)) +
                           ", view 0 has " + std::to_string(tables.front().dim(1)));
    if (expected_dim && t.dim(1) != *expected_dim)
      throw DimensionError("backbone " + m.backbone + " embeds to " + std::to_string(*expected_dim) +
                           " dims, view " + std::to_string(k) + " has " + std::to_string(t.dim(1)));
    tables.push_back(std::move(t));
  }
  return tables;
}

}  // namespace brainalign::dataio
