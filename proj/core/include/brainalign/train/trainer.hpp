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
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "brainalign/dataio/dataset.hpp"
#include "brainalign/train/model.hpp"

namespace brainalign::train {

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double loss = 0;        // mean batch loss
  double tau = 0;
  std::optional<double> top1, top5;
  double seconds = 0;
};

struct RunLog {
  std::vector<EpochRecord> rows;
  std::vector<std::vector<double>> batch_losses;  // [epoch][batch]

  // Header epoch,loss,tau,top1,top5,seconds. Unscheduled metrics are empty.
  std::string to_csv() const;
  void write(const std::filesystem::path& path) const;
};

// Batches of dataset indices for one epoch: a seeded Fisher-Yates
// permutation of `indices` cut into batch_size chunks. A trailing chunk is
// kept when it has at least two samples.
std::vector<std::vector<std::size_t>> shuffle_batches(std::span<const std::size_t> indices, std::size_t batch_size,
                                                      std::uint64_t epoch, std::uint64_t seed);

// Dropout seed of one training step.
std::uint64_t dropout_seed(std::uint64_t seed, std::uint64_t epoch, std::uint64_t batch);

// Loss of one batch exactly as a training step computes it. Stateless, so
// it doubles as the forward replay used to audit the trainer.
Tensor batch_loss(const Model& model, const dataio::PairedDataset& dataset,
                  const std::optional<cpa::AugmentationPipeline>& pipeline, std::span<const std::size_t> batch,
                  std::uint64_t epoch, std::uint64_t batch_index);

// The augmentation pipeline a config selects (nullopt with cpa off).
std::optional<cpa::AugmentationPipeline> make_pipeline(const TrainConfig& config);

struct TrainOptions {
  std::filesystem::path checkpoint;  // written at the cadence and at the end; empty = none
  std::filesystem::path run_log;     // CSV; empty = none
  // Called after every epoch row is recorded.
  std::function<void(const EpochRecord&)> on_epoch;
};

struct TrainResult {
  Model model;
  RunLog log;
  std::size_t steps = 0;
};

// Pre-flight checks the config against the dataset, then runs the epoch
// loop. A non-finite loss or gradient writes the last good checkpoint (when
// a path is set) and throws NumericError. Training changes no f_I tensor;
// this is audited every epoch.
TrainResult train(const TrainConfig& config, const dataio::PairedDataset& dataset, const TrainOptions& options = {});

// Archive with every trainable tensor plus meta {format, version, config,
// config_digest, data_shape, train_concepts, epoch}.
void save_checkpoint(const std::filesystem::path& path, const Model& model,
                     const std::vector<std::int64_t>& train_concepts, std::size_t epoch);

struct Checkpoint {
  TrainConfig config;
  Model model;
  std::vector<std::int64_t> train_concepts;
  std::size_t epoch = 0;
};
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace brainalign::train
