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

#include <string>

#include "brainalign/tensor/tensor.hpp"

namespace brainalign::align {

// Which sides are unit-normalized before the dot product:
// plain neither, sym both, inv_asym EEG only, asym image only.
enum class LossVariant { plain, sym, inv_asym, asym };

std::string to_string(LossVariant variant);
LossVariant parse_loss_variant(const std::string& name);
bool normalizes_image(LossVariant variant);
bool normalizes_eeg(LossVariant variant);

inline constexpr double kNormEpsilon = 1e-12;

struct LossConfig {
  double temperature = 0.07;
  LossVariant variant = LossVariant::asym;
  bool learnable_tau = false;
  // Exclude the positive from each softmax denominator.
  bool strict_negatives = false;
};

// Unit-normalizes rows with the kNormEpsilon guard. A zero row logs a warning
// and maps to zero.
Tensor normalize_rows(const Tensor& z);

// S[i][j] = <n_I(z_I,i), n_E(z_E,j)>, rows image, columns EEG.
Tensor similarity_matrix(const Tensor& image, const Tensor& eeg, LossVariant variant);

// Symmetric InfoNCE over both directions of S / tau, averaged over the 2B
// terms. inv_tau is a one-element tensor holding 1 / tau.
Tensor contrastive_loss(const Tensor& similarity, const Tensor& inv_tau, bool strict_negatives = false);
Tensor contrastive_loss(const Tensor& similarity, double tau, bool strict_negatives = false);

// Fixed tau, or learnable tau stored as a trainable log tau.
class Temperature {
 public:
  explicit Temperature(const LossConfig& config, DType dtype = DType::f32);

  double value() const;
  // 1 / tau as a graph node (a constant in fixed mode).
  Tensor inverse() const;
  bool learnable() const { return learnable_; }
  // The trainable log tau; undefined in fixed mode.
  Tensor& log_tau() { return log_tau_; }
  const Tensor& log_tau() const { return log_tau_; }

 private:
  bool learnable_;
  double fixed_;
  DType dtype_;
  Tensor log_tau_;
};

}  // namespace brainalign::align
