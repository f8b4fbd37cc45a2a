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

#include "brainalign/dataio/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "brainalign/dataio/container.hpp"

namespace brainalign::dataio {

using nlohmann::json;

std::vector<std::int64_t> concept_overlap(std::vector<std::int64_t> a, std::vector<std::int64_t> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::vector<std::int64_t> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

std::vector<std::size_t> PairedDataset::indices(Split split) const {
  const auto& pool = split == Split::train ? train_concepts : test_concepts;
  std::set<std::int64_t> members(pool.begin(), pool.end());
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < concept_ids.size(); ++i)
    if (members.count(concept_ids[i])) out.push_back(i);
  return out;
}

std::vector<std::int64_t> PairedDataset::concepts_in(Split split) const {
  std::vector<std::int64_t> out;
  std::set<std::int64_t> seen;
  for (std::size_t i : indices(split))
    if (seen.insert(concept_ids[i]).second) out.push_back(concept_ids[i]);
  return out;
}

void PairedDataset::validate() const {
  if (!eeg.defined() || eeg.ndim() != 3)
    throw DimensionError("dataset: EEG trials must be [N, C, T]");
  const std::size_t n = eeg.dim(0);
  if (concept_ids.size() != n)
    throw ContractError("dataset: " + std::to_string(concept_ids.size()) + " concept ids for " +
                        std::to_string(n) + " EEG trials");
  if (images) {
    if (images->ndim() != 4 || images->dim(0) != n)
      throw DimensionError("dataset: images must be [N, C, H, W] with N = " + std::to_string(n) +
                           ", got " + to_string(images->shape()));
    for (double v : images->to_vector())
      if (!(v >= 0.0 && v <= 1.0)) throw ContractError("dataset: pixel values must lie in [0, 1]");
  }
  for (std::size_t k = 0; k < view_embeddings.size(); ++k) {
    const Tensor& v = view_embeddings[k];
    if (v.ndim() != 2 || v.dim(0) != n)
      throw DimensionError("dataset: view " + std::to_string(k) + " embeddings must be [N, D], got " +
                           to_string(v.shape()));
    if (v.dim(1) != view_embeddings[0].dim(1))
      throw DimensionError("dataset: view " + std::to_string(k) + " has embedding dim " +
                           std::to_string(v.dim(1)) + ", view 0 has " +
                           std::to_string(view_embeddings[0].dim(1)));
  }
  if (!images && view_embeddings.empty())
    throw ContractError("dataset: needs pixel images or view embeddings");
  auto both = concept_overlap(train_concepts, test_concepts);
  if (!both.empty())
    throw ZeroShotViolation("dataset: " + std::to_string(both.size()) +
                            " concepts appear in both train and test splits (first: " +
                            std::to_string(both.front()) + ")");
  std::set<std::int64_t> known(train_concepts.begin(), train_concepts.end());
  known.insert(test_concepts.begin(), test_concepts.end());
  for (std::size_t i = 0; i < n; ++i)
    if (!known.count(concept_ids[i]))
      throw ContractError("dataset: pair " + std::to_string(i) + " has concept " +
                          std::to_string(concept_ids[i]) + " outside both splits");
}

std::filesystem::path save_dataset(const std::filesystem::path& dir, const PairedDataset& ds,
                                   const ManifestInfo& info) {
  ds.validate();
  std::filesystem::create_directories(dir);
  json m;
  m["format"] = "brainalign.manifest";
  m["version"] = 1;
  write_container(dir / "eeg.nbtf", ds.eeg);
  m["eeg"] = "eeg.nbtf";
  if (ds.images) {
    write_container(dir / "images.nbtf", *ds.images);
    m["images"] = "images.nbtf";
  }
  m["image_views"] = json::array();
  for (std::size_t k = 0; k < ds.view_embeddings.size(); ++k) {
    std::string name = "view_" + std::to_string(k) + ".nbtf";
    write_container(dir / name, ds.view_embeddings[k]);
    m["image_views"].push_back(name);
  }
  m["concept_ids"] = ds.concept_ids;
  m["split"] = {{"train", ds.train_concepts}, {"test", ds.test_concepts}};
  json modality = {{"eeg_channels", ds.eeg_channels()},
                   {"eeg_samples", ds.eeg_samples()},
                   {"sampling_rate_hz", info.sampling_rate_hz}};
  if (ds.images) modality["image_shape"] = Shape(ds.images->shape().begin() + 1, ds.images->shape().end());
  if (!ds.view_embeddings.empty()) modality["embedding_dim"] = ds.view_embeddings[0].dim(1);
  m["modality"] = modality;
  const auto path = dir / "manifest.json";
  const std::string text = m.dump(2) + "\n";
  write_file_atomic(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
  return path;
}

PairedDataset load_dataset(const std::filesystem::path& manifest_path) {
  std::ifstream is(manifest_path);
  if (!is) throw IoError("cannot open manifest " + manifest_path.string());
  json m;
  try {
    m = json::parse(is);
  } catch (const json::exception& e) {
    throw ContractError("manifest " + manifest_path.string() + ": " + e.what());
  }
  const auto dir = manifest_path.parent_path();
  PairedDataset ds;
  try {
    if (m.value("format", "") != "brainalign.manifest" || m.value("version", 0) != 1)
      throw ContractError("manifest " + manifest_path.string() + ": unsupported format/version");
    ds.eeg = read_container(dir / m.at("eeg").get<std::string>());
    if (m.contains("images")) ds.images = read_container(dir / m.at("images").get<std::string>());
    std::size_t k = 0;
    for (const auto& v : m.value("image_views", json::array())) {
      const auto path = dir / v.get<std::string>();
      if (!std::filesystem::exists(path))
        throw IoError("missing embedding file for view " + std::to_string(k) + ": " + path.string());
      ds.view_embeddings.push_back(read_container(path));
      ++k;
    }
    ds.concept_ids = m.at("concept_ids").get<std::vector<std::int64_t>>();
    ds.train_concepts = m.at("split").at("train").get<std::vector<std::int64_t>>();
    ds.test_concepts = m.at("split").at("test").get<std::vector<std::int64_t>>();
  } catch (const json::exception& e) {
    throw ContractError("manifest " + manifest_path.string() + ": " + e.what());
  }
  ds.validate();
  return ds;
}

}  // namespace brainalign::dataio
