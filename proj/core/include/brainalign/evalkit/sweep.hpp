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
#include <string>
#include <vector>

#include "brainalign/dataio/dataset.hpp"
#include "brainalign/train/config.hpp"

namespace brainalign::evalkit {

enum class SweepAxis { fusion_k, loss_variant, batch_size, temperature, transform_set };

std::string to_string(SweepAxis axis);
SweepAxis parse_sweep_axis(const std::string& name);

// The base config with one axis value applied.
//   fusion_K       K image views; pixel mode takes the first K of the seven
//                  transforms (keeping the base pipeline's parameters for
//                  kinds it already lists), embedding mode fuses K tables
//   loss_variant   plain | sym | inv_asym | asym | vanilla (cpa off,
//                  identity projector, plain loss)
//   batch_size, temperature   numeric
//   transform_set  '+'-joined image transform kinds, e.g. mosaic+low_resolution
train::TrainConfig apply_axis(const train::TrainConfig& base, SweepAxis axis, const std::string& value);

struct SweepRun {
  std::string value;
  std::uint64_t seed = 0;
  double top1 = 0, top5 = 0, final_loss = 0;
};

struct SweepRow {
  std::string value;
  std::size_t seeds = 0;
  double top1_mean = 0, top1_std = 0, top5_mean = 0, top5_std = 0;
};

struct SweepTable {
  SweepAxis axis = SweepAxis::fusion_k;
  std::vector<SweepRun> runs;
  std::vector<SweepRow> rows;  // one per value, in the given order

  // axis,value,seeds,top1_mean,top1_std,top5_mean,top5_std
  std::string to_csv() const;
  // axis,value,seed,top1,top5,final_loss
  std::string runs_csv() const;
};

// One training run per (value, seed); seeds replace config.seed. Top-k
// accuracies come from evaluate() with the base eval settings.
SweepTable ablation_sweep(const train::TrainConfig& base, const dataio::PairedDataset& dataset, SweepAxis axis,
                          const std::vector<std::string>& values, const std::vector<std::uint64_t>& seeds);

}  // namespace brainalign::evalkit
