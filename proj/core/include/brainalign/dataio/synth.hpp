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
#include <vector>

#include "brainalign/dataio/dataset.hpp"

namespace brainalign::dataio {

// Linear-Gaussian stand-in for a paired EEG/image corpus. Each concept gets
// a latent vector; every pair perturbs it slightly. EEG trials are a fixed
// random spatio-temporal map of the pair latent plus channel-correlated
// noise; pixel images are a squashed fixed random spatial basis expansion of
// it; precomputed embeddings are a fixed random linear map plus noise, with
// independent per-view noise on top.
struct SynthConfig {
  std::size_t train_concepts = 50;
  std::size_t test_concepts = 20;
  std::size_t images_per_concept = 8;       // train pairs per concept
  std::size_t test_images_per_concept = 1;  // test pairs per concept
  std::size_t eeg_channels = 16;
  std::size_t eeg_samples = 48;
  std::size_t latent_dim = 16;
  std::size_t image_channels = 3;
  std::size_t image_size = 16;
  std::size_t embed_dim = 64;
  std::size_t views = 0;            // view embedding tables to emit (0 = pixels only)
  bool pixels = true;               // emit pixel images
  double pair_jitter = 0.3;         // per-pair latent deviation from the concept latent
  double eeg_noise = 0.1;
  // Trial-to-trial evoked amplitude: the signal of each trial is scaled by
  // exp(spread * g), g ~ N(0, 1). 0 gives every trial unit gain.
  double trial_gain_spread = 0.0;
  double pixel_noise = 0.0;
  double embed_noise = 0.0;
  double view_noise = 0.0;
  // EEG channel c at every time step equals latent c, embeddings equal the
  // latent. Requires eeg_channels == embed_dim == latent_dim.
  bool identity_maps = false;
  std::uint64_t seed = 42;
  DType dtype = DType::f32;
};

struct SyntheticData {
  PairedDataset dataset;
  Tensor latents;          // [N, latent_dim] pair latents (f64)
  Tensor concept_latents;  // [concepts, latent_dim] (f64)
};

// Train concepts get ids 0..train-1, test concepts follow.
SyntheticData synthesize_dataset(const SynthConfig& config);

// Raw-recording simulation for preprocessing demos: every clean trial is
// repeated `repetitions` times, each sample held for `hold` steps, a
// pre-stimulus segment prepended, a per-(trial, channel) DC offset added to
// the whole epoch and fresh Gaussian noise added per repetition.
struct RawTrialConfig {
  std::size_t repetitions = 4;
  std::size_t pre_samples = 50;
  std::size_t hold = 4;
  double offset_std = 1.0;
  double noise = 0.5;
  std::uint64_t seed = 7;
};
struct RawTrials {
  Tensor trials;                          // [N * R, C, pre + T * hold]
  std::vector<std::int64_t> stimulus_ids; // pair index of every raw trial
};
RawTrials simulate_raw_trials(const Tensor& clean, const RawTrialConfig& config);

}  // namespace brainalign::dataio
