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

#include <fstream>
#include <random>

#include <gtest/gtest.h>

#include "brainalign/dataio/container.hpp"
#include "brainalign/dataio/extraction.hpp"
#include "brainalign/dataio/image_io.hpp"
#include "brainalign/error.hpp"
#include "scratch_dir.hpp"

namespace brainalign::dataio {
namespace {

using testing::ScratchDir;

Tensor random_views(std::size_t k, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<double> v(k * n * 3 * 6 * 5);
  for (double& x : v) x = u(rng);
  return Tensor::from_values(v, {k, n, 3, 6, 5}, DType::f64);
}

// Stand-in for the offline extractor: one [N, dim] container per view.
void fake_extract(const std::filesystem::path& dir, const ExtractionManifest& m, std::size_t dim) {
  for (std::size_t k = 0; k < m.outputs.size(); ++k)
    write_container(dir / m.outputs[k], Tensor::full({m.images(), dim}, double(k), DType::f32));
}

TEST(Extraction, BackboneDims) {
  EXPECT_EQ(backbone_embedding_dim("RN50"), 1024u);
  EXPECT_EQ(backbone_embedding_dim("RN101"), 512u);
  EXPECT_EQ(backbone_embedding_dim("ViT-B-16"), 512u);
  EXPECT_EQ(backbone_embedding_dim("ViT-B-32"), 512u);
  EXPECT_EQ(backbone_embedding_dim("ViT-L-14"), 768u);
  EXPECT_EQ(backbone_embedding_dim("ViT-H-14"), 1024u);
  EXPECT_EQ(backbone_embedding_dim("ViT-g-14"), 1024u);
  EXPECT_EQ(backbone_embedding_dim("ViT-bigG-14"), 1280u);
  EXPECT_FALSE(backbone_embedding_dim("custom").has_value());
}

TEST(Extraction, ExportWritesPngsAndManifest) {
  ScratchDir dir;
  Tensor views = random_views(2, 3, 1);
  auto m = export_view_pngs(dir.path(), views);
  EXPECT_EQ(m.views.size(), 2u);
  EXPECT_EQ(m.images(), 3u);
  EXPECT_EQ(m.outputs.size(), 2u);
  for (const auto& view : m.views)
    for (const auto& rel : view) EXPECT_EQ(read_png(dir / rel).shape(), (Shape{3, 6, 5}));
  auto back = read_extraction_manifest(dir / "extract.json");
  EXPECT_EQ(back.views, m.views);
  EXPECT_EQ(back.outputs, m.outputs);
  EXPECT_EQ(back.backbone, "RN50");
}

TEST(Extraction, ExportIsDeterministic) {
  ScratchDir a, b;
  Tensor views = random_views(2, 2, 2);
  auto m = export_view_pngs(a.path(), views);
  export_view_pngs(b.path(), views);
  EXPECT_EQ(read_file(a / "extract.json"), read_file(b / "extract.json"));
  for (const auto& view : m.views)
    for (const auto& rel : view) EXPECT_EQ(read_file(a / rel), read_file(b / rel));
}

TEST(Extraction, LoadsMatchingContainers) {
  ScratchDir dir;
  auto m = export_view_pngs(dir.path(), random_views(2, 4, 3));
  fake_extract(dir.path(), m, 1024);
  auto tables = load_extracted_embeddings(dir / "extract.json");
  ASSERT_EQ(tables.size(), 2u);
  EXPECT_EQ(tables[1].shape(), (Shape{4, 1024}));
  EXPECT_EQ(tables[1].at({3, 1023}), 1.0);
}

TEST(Extraction, WrongBackboneDimRejected) {
  ScratchDir dir;
  auto m = export_view_pngs(dir.path(), random_views(1, 2, 4));
  fake_extract(dir.path(), m, 512);
  EXPECT_THROW(load_extracted_embeddings(dir / "extract.json"), DimensionError);
}

TEST(Extraction, RowCountAndViewDimsChecked) {
  ScratchDir dir;
  auto m = export_view_pngs(dir.path(), random_views(2, 3, 5), "custom");
  write_container(dir / m.outputs[0], Tensor::zeros({3, 16}));
  write_container(dir / m.outputs[1], Tensor::zeros({3, 8}));
  EXPECT_THROW(load_extracted_embeddings(dir / "extract.json"), DimensionError);
  write_container(dir / m.outputs[1], Tensor::zeros({2, 16}));
  EXPECT_THROW(load_extracted_embeddings(dir / "extract.json"), DimensionError);
  write_container(dir / m.outputs[1], Tensor::zeros({3, 16}));
  EXPECT_EQ(load_extracted_embeddings(dir / "extract.json").size(), 2u);
}

TEST(Extraction, MissingOutputNamesView) {
  ScratchDir dir;
  auto m = export_view_pngs(dir.path(), random_views(2, 2, 6));
  write_container(dir / m.outputs[0], Tensor::zeros({2, 1024}));
  try {
    load_extracted_embeddings(dir / "extract.json");
    FAIL();
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find("view 1"), std::string::npos) << e.what();
  }
}

TEST(Extraction, ManifestValidation) {
  ExtractionManifest m;
  EXPECT_THROW(m.validate(), ContractError);
  m.views = {{"a.png", "b.png"}, {"c.png"}};
  m.outputs = {"v0.nbtf", "v1.nbtf"};
  EXPECT_THROW(m.validate(), ContractError);
  m.views[1].push_back("d.png");
  EXPECT_NO_THROW(m.validate());
  m.outputs.pop_back();
  EXPECT_THROW(m.validate(), ContractError);
  EXPECT_THROW(ExtractionManifest::from_json({{"format", "other"}}, "."), ContractError);
}

}  // namespace
}  // namespace brainalign::dataio
