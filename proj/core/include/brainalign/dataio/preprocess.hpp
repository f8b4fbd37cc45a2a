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
#include <span>
#include <vector>

#include "brainalign/tensor/tensor.hpp"

// EEG preprocessing. Functions accept a single trial [C, T] or a batch
// [N, C, T] and return the input dtype; arithmetic runs in double.
namespace brainalign::dataio {

struct PreprocessConfig {
  std::size_t pre_samples = 0;      // pre-stimulus samples at the start of each raw trial
  std::size_t baseline_window = 0;  // trailing pre-stimulus samples averaged for the baseline
  std::size_t downsample_factor = 1;
  bool mvnn_enabled = true;
  double mvnn_shrinkage = 0.1;
  std::size_t repetitions = 1;
};

// Subtracts each channel's mean over the last `baseline_window` pre-stimulus
// samples and drops the pre-stimulus segment: [.., C, pre + T] -> [.., C, T].
Tensor baseline_correct(const Tensor& trials, std::size_t pre_samples, std::size_t baseline_window);

// Block-mean decimation along time; a trailing partial block is dropped.
Tensor downsample(const Tensor& trials, std::size_t factor);

// Multivariate noise normalization with a pooled channel covariance.
class Whitening {
 public:
  // Estimates the (mean-centred, 1/(n-1)) channel covariance over every
  // (trial, time) sample, shrinks it towards its diagonal,
  // (1 - shrinkage) * S + shrinkage * diag(S), and stores the symmetric
  // inverse square root. Throws NumericError when the shrunk covariance is
  // not positive definite.
  static Whitening fit(const Tensor& trials, double shrinkage);

  // Left-multiplies every trial by the whitening matrix.
  Tensor apply(const Tensor& trials) const;
  const Tensor& matrix() const { return matrix_; }  // [C, C], f64

 private:
  Tensor matrix_;
};

struct WhitenResult {
  Tensor trials;
  Tensor matrix;
};
// Fit-and-apply on the same data.
WhitenResult mvnn_whiten(const Tensor& trials, double shrinkage);

// Averages repetitions of each stimulus. Groups are keyed by stimulus id in
// order of first appearance and must each hold exactly `repetitions`
// trials. The stimulus id of each output row is written to out_ids if given.
Tensor average_repetitions(const Tensor& trials, std::span<const std::int64_t> stimulus_ids,
                           std::size_t repetitions, std::vector<std::int64_t>* out_ids = nullptr);

// baseline -> downsample -> repetition averaging -> MVNN (fitted on
// `fit_on` if given, else on the averaged trials themselves).
struct PreprocessResult {
  Tensor trials;
  std::vector<std::int64_t> stimulus_ids;
  Tensor whitening;  // undefined when MVNN is disabled
};
PreprocessResult preprocess(const Tensor& raw, std::span<const std::int64_t> stimulus_ids,
                            const PreprocessConfig& config, const Whitening* fitted = nullptr);

}  // namespace brainalign::dataio
