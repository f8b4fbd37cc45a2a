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

#include "brainalign/train/model.hpp"

#include "brainalign/seed.hpp"
#include "brainalign/tensor/ops.hpp"

namespace brainalign::train {

DataShape DataShape::of(const dataio::PairedDataset& dataset) {
  DataShape s;
  s.eeg_channels = dataset.eeg_channels();
  s.eeg_samples = dataset.eeg_samples();
  if (dataset.images) s.image_shape = std::array{dataset.images->dim(1), dataset.images->dim(2), dataset.images->dim(3)};
  s.views = dataset.view_embeddings.size();
  if (s.views) s.embed_dim = dataset.view_embeddings[0].dim(1);
  return s;
}

nlohmann::json DataShape::to_json() const {
  nlohmann::json j{{"eeg_channels", eeg_channels}, {"eeg_samples", eeg_samples}, {"embed_dim", embed_dim}, {"views", views}};
  j["image_shape"] = image_shape ? nlohmann::json(*image_shape) : nlohmann::json(nullptr);
  return j;
}

DataShape DataShape::from_json(const nlohmann::json& doc) {
  DataShape s;
  try {
    s.eeg_channels = doc.at("eeg_channels").get<std::size_t>();
    s.eeg_samples = doc.at("eeg_samples").get<std::size_t>();
    s.embed_dim = doc.at("embed_dim").get<std::size_t>();
    s.views = doc.at("views").get<std::size_t>();
    if (!doc.at("image_shape").is_null()) s.image_shape = doc.at("image_shape").get<std::array<std::size_t, 3>>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("data shape: ") + e.what(), 0);
  }
  return s;
}

namespace {

std::size_t feature_dim(const TrainConfig& config, const DataShape& shape) {
  if (config.image_source.kind == encoders::ImageSourceKind::reference_encoder) {
    if (!shape.image_shape)
      throw ContractError("image_source.kind=reference_encoder needs pixel images in the dataset");
    return config.image_source.output_dim;
  }
  if (shape.views == 0) throw ContractError("image_source.kind=embedding_files needs view embedding tables");
  if (config.image_source.views > shape.views)
    throw ContractError("image_source.views=" + std::to_string(config.image_source.views) + " but the dataset has " +
                        std::to_string(shape.views) + " view tables");
  return shape.embed_dim;
}

std::optional<encoders::ReferenceImageEncoder> make_image_encoder(const TrainConfig& config, const DataShape& shape) {
  if (config.image_source.kind != encoders::ImageSourceKind::reference_encoder) return std::nullopt;
  const auto& s = *shape.image_shape;
  return encoders::ReferenceImageEncoder(config.image_source, s[0], s[1], s[2], config.dtype);
}

}  // namespace

Model::Model(const TrainConfig& config, const DataShape& shape)
    : config_(config),
      shape_(shape),
      eeg_encoder_(config.eeg_encoder, shape.eeg_channels, shape.eeg_samples, derive_seed({config.seed, 1}),
                   config.dtype),
      image_encoder_(make_image_encoder(config, shape)),
      image_projector_(config.projector, feature_dim(config, shape),
                       align::resolve_output_dim(config.projector, feature_dim(config, shape)),
                       derive_seed({config.seed, 2}), config.dtype),
      eeg_projector_(config.projector, config.eeg_encoder.output_dim, image_projector_.output_dim(),
                     derive_seed({config.seed, 3}), config.dtype),
      temperature_(config.loss, config.dtype) {}

std::size_t Model::image_feature_dim() const { return image_projector_.input_dim(); }

std::size_t Model::fused_views(const std::optional<cpa::AugmentationPipeline>& pipeline) const {
  if (image_encoder_) return pipeline ? pipeline->views() : 1;
  return config_.image_source.views ? config_.image_source.views : shape_.views;
}

Tensor Model::image_features(const dataio::PairedDataset& dataset, std::span<const std::size_t> rows,
                             const cpa::AugmentationPipeline* pipeline, std::uint64_t epoch) const {
  if (image_encoder_) {
    if (!dataset.images) throw ContractError("model expects pixel images but the dataset has none");
    const Tensor images = gather_rows(*dataset.images, rows);
    if (!pipeline) return image_encoder_->encode(images);
    std::vector<Tensor> views;
    for (const Tensor& view : cpa::augment_images(*pipeline, images, rows, epoch))
      views.push_back(image_encoder_->encode(view));
    return encoders::fuse_views(views);
  }
  Tensor stacked = encoders::gather_view_embeddings(dataset, rows, config_.image_source.views);
  if (stacked.dtype() != config_.dtype) stacked = stacked.to(config_.dtype);
  return encoders::fuse_views(stacked);
}

Tensor Model::eeg_features(const Tensor& eeg, bool training, std::uint64_t dropout_seed) const {
  const Tensor x = eeg.dtype() == config_.dtype ? eeg : eeg.to(config_.dtype);
  return eeg_encoder_.forward(x, training, dropout_seed);
}

std::uint64_t Model::image_source_checksum() const { return image_encoder_ ? image_encoder_->checksum() : 0; }

encoders::NamedTensors Model::named_parameters() const {
  encoders::NamedTensors out;
  for (const auto& [name, t] : eeg_encoder_.parameters()) out.emplace_back("eeg_encoder." + name, t);
  for (const auto& [name, t] : image_projector_.parameters()) out.emplace_back("image_projector." + name, t);
  for (const auto& [name, t] : eeg_projector_.parameters()) out.emplace_back("eeg_projector." + name, t);
  if (temperature_.learnable()) out.emplace_back("loss.log_tau", temperature_.log_tau());
  return out;
}

std::vector<AdamW::Param> Model::optimizer_params() const {
  std::vector<AdamW::Param> out;
  for (const auto& [name, t] : named_parameters()) out.push_back({t, name != "loss.log_tau"});
  return out;
}

}  // namespace brainalign::train
