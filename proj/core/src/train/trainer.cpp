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

#include "brainalign/train/trainer.hpp"

#include <chrono>
#include <cmath>
#include <random>
#include <sstream>

#include "brainalign/dataio/container.hpp"
#include "brainalign/evalkit/export.hpp"
#include "brainalign/evalkit/retrieval.hpp"
#include "brainalign/seed.hpp"
#include "brainalign/tensor/ops.hpp"

namespace brainalign::train {

namespace {

constexpr std::uint64_t kShuffleTag = 0x5348;
constexpr std::uint64_t kDropoutTag = 0x4450;

std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t n) {
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t x;
  do x = rng();
  while (x >= limit);
  return x % n;
}

std::string optional_number(const std::optional<double>& v) {
  return v ? evalkit::format_double(*v) : std::string();
}

void preflight(const TrainConfig& config, const dataio::PairedDataset& dataset) {
  config.validate();
  dataset.validate();
  const auto train_idx = dataset.indices(dataio::Split::train);
  if (train_idx.size() < 2) throw ContractError("training split has fewer than two pairs");
  if (config.eval_every) {
    const auto test = dataset.concepts_in(dataio::Split::test);
    if (config.eval.n_way > test.size())
      throw ContractError("eval.n_way=" + std::to_string(config.eval.n_way) + " exceeds the " +
                          std::to_string(test.size()) + " test concepts");
  }
}

}  // namespace

std::string RunLog::to_csv() const {
  std::ostringstream os;
  os << "epoch,loss,tau,top1,top5,seconds\n";
  for (const auto& r : rows)
    os << r.epoch << ',' << evalkit::format_double(r.loss) << ',' << evalkit::format_double(r.tau) << ','
       << optional_number(r.top1) << ',' << optional_number(r.top5) << ',' << evalkit::format_double(r.seconds) << '\n';
  return os.str();
}

void RunLog::write(const std::filesystem::path& path) const {
  const std::string text = to_csv();
  dataio::write_file_atomic(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::vector<std::vector<std::size_t>> shuffle_batches(std::span<const std::size_t> indices, std::size_t batch_size,
                                                      std::uint64_t epoch, std::uint64_t seed) {
  if (batch_size < 2) throw ContractError("batch_size must be >= 2");
  std::vector<std::size_t> order(indices.begin(), indices.end());
  std::mt19937_64 rng(derive_seed({seed, kShuffleTag, epoch}));
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[bounded(rng, i)]);
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t start = 0; start < order.size(); start += batch_size) {
    const std::size_t end = std::min(order.size(), start + batch_size);
    if (end - start < 2) break;
    batches.emplace_back(order.begin() + std::ptrdiff_t(start), order.begin() + std::ptrdiff_t(end));
  }
  return batches;
}

std::uint64_t dropout_seed(std::uint64_t seed, std::uint64_t epoch, std::uint64_t batch) {
  return derive_seed({seed, kDropoutTag, epoch, batch});
}

std::optional<cpa::AugmentationPipeline> make_pipeline(const TrainConfig& config) {
  if (!config.cpa) return std::nullopt;
  return cpa::parse_pipeline(config.pipeline, config.seed);
}

Tensor batch_loss(const Model& model, const dataio::PairedDataset& dataset,
                  const std::optional<cpa::AugmentationPipeline>& pipeline, std::span<const std::size_t> batch,
                  std::uint64_t epoch, std::uint64_t batch_index) {
  const TrainConfig& config = model.config();
  Tensor eeg = gather_rows(dataset.eeg, batch);
  if (pipeline) eeg = cpa::augment_eeg(*pipeline, eeg, batch, epoch);
  const Tensor h_e = model.eeg_features(eeg, true, dropout_seed(config.seed, epoch, batch_index));
  const Tensor h_i = model.image_features(dataset, batch, pipeline ? &*pipeline : nullptr, epoch);
  const Tensor s = align::similarity_matrix(model.project_image(h_i), model.project_eeg(h_e), config.loss.variant);
  return align::contrastive_loss(s, model.temperature().inverse(), config.loss.strict_negatives);
}

TrainResult train(const TrainConfig& config, const dataio::PairedDataset& dataset, const TrainOptions& options) {
  preflight(config, dataset);
  TrainResult result{Model(config, DataShape::of(dataset)), {}, 0};
  Model& model = result.model;
  const auto pipeline = make_pipeline(config);
  AdamW optimizer(model.optimizer_params(), config.optimizer);
  const auto train_idx = dataset.indices(dataio::Split::train);
  const auto train_concepts = dataset.concepts_in(dataio::Split::train);
  const std::uint64_t frozen = model.image_source_checksum();

  auto checkpoint = [&](std::size_t epoch) {
    if (!options.checkpoint.empty()) save_checkpoint(options.checkpoint, model, train_concepts, epoch);
  };

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    const auto batches = shuffle_batches(train_idx, config.batch_size, epoch, config.seed);
    std::vector<double> losses;
    for (std::size_t b = 0; b < batches.size(); ++b) {
      const Tensor loss = batch_loss(model, dataset, pipeline, batches[b], epoch, b);
      const double value = loss.item();
      if (!std::isfinite(value)) {
        checkpoint(epoch);
        throw NumericError("non-finite loss at epoch " + std::to_string(epoch + 1) + ", batch " + std::to_string(b + 1) +
                           (options.checkpoint.empty() ? "" : "; last good state saved to " + options.checkpoint.string()));
      }
      loss.backward();
      try {
        optimizer.step();
      } catch (const NumericError&) {
        checkpoint(epoch);
        throw;
      }
      optimizer.zero_grad();
      losses.push_back(value);
      ++result.steps;
    }
    if (model.image_source_checksum() != frozen)
      throw ContractError("freeze audit failed: the image feature source changed during epoch " +
                          std::to_string(epoch + 1));

    EpochRecord row;
    row.epoch = epoch + 1;
    for (double l : losses) row.loss += l;
    row.loss /= double(losses.size());
    row.tau = model.temperature().value();
    if (config.eval_every && (row.epoch % config.eval_every == 0 || row.epoch == config.epochs)) {
      const auto report = evalkit::evaluate(model, dataset, config.eval, train_concepts);
      for (std::size_t i = 0; i < report.top_k.size(); ++i) {
        if (report.top_k[i] == 1) row.top1 = report.accuracy[i];
        if (report.top_k[i] == 5) row.top5 = report.accuracy[i];
      }
    }
    if (config.log_wall_time)
      row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.log.rows.push_back(row);
    result.log.batch_losses.push_back(std::move(losses));
    if (options.on_epoch) options.on_epoch(row);
    if (config.checkpoint_every && row.epoch % config.checkpoint_every == 0 && row.epoch != config.epochs)
      checkpoint(row.epoch);
  }
  checkpoint(config.epochs);
  if (!options.run_log.empty()) result.log.write(options.run_log);
  return result;
}

void save_checkpoint(const std::filesystem::path& path, const Model& model,
                     const std::vector<std::int64_t>& train_concepts, std::size_t epoch) {
  dataio::Archive archive;
  archive.meta = {
      {"format", "brainalign.checkpoint"},
      {"version", 1},
      {"config", to_json(model.config())},
      {"config_digest", config_digest(model.config())},
      {"data_shape", model.shape().to_json()},
      {"train_concepts", train_concepts},
      {"epoch", epoch},
  };
  for (const auto& [name, t] : model.named_parameters()) archive.tensors.emplace_back(name, t.detach());
  dataio::write_archive(path, archive);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  const dataio::Archive archive = dataio::read_archive(path);
  const auto& meta = archive.meta;
  if (!meta.is_object() || meta.value("format", "") != "brainalign.checkpoint")
    throw FormatError(path.string() + " is not a checkpoint archive", 0);
  TrainConfig config = config_from_json(meta.at("config"));
  if (meta.value("config_digest", "") != config_digest(config))
    throw FormatError(path.string() + ": config digest mismatch", 0);
  Checkpoint ck{config, Model(config, DataShape::from_json(meta.at("data_shape"))),
                meta.at("train_concepts").get<std::vector<std::int64_t>>(), meta.at("epoch").get<std::size_t>()};
  for (auto [name, param] : ck.model.named_parameters()) {
    if (!archive.contains(name)) throw FormatError(path.string() + ": missing tensor '" + name + "'", 0);
    const Tensor& stored = archive.at(name);
    if (stored.shape() != param.shape() || stored.dtype() != param.dtype())
      throw FormatError(path.string() + ": tensor '" + name + "' has shape " + to_string(stored.shape()) +
                            ", expected " + to_string(param.shape()),
                        0);
    visit_dtype(param.dtype(), [&]<class T>() {
      auto src = stored.values<T>();
      auto dst = param.mutable_values<T>();
      std::copy(src.begin(), src.end(), dst.begin());
    });
  }
  return ck;
}

}  // namespace brainalign::train
