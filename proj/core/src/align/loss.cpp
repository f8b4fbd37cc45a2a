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

#include "brainalign/align/loss.hpp"

#include <cmath>
#include <limits>

#include "brainalign/log.hpp"
#include "brainalign/tensor/ops.hpp"

namespace brainalign::align {

std::string to_string(LossVariant variant) {
  switch (variant) {
    case LossVariant::plain: return "plain";
    case LossVariant::sym: return "sym";
    case LossVariant::inv_asym: return "inv_asym";
    default: return "asym";
  }
}

LossVariant parse_loss_variant(const std::string& name) {
  if (name == "plain") return LossVariant::plain;
  if (name == "sym") return LossVariant::sym;
  if (name == "inv_asym") return LossVariant::inv_asym;
  if (name == "asym") return LossVariant::asym;
  throw ContractError("unknown loss variant '" + name + "' (expected plain, sym, inv_asym or asym)");
}

bool normalizes_image(LossVariant v) { return v == LossVariant::sym || v == LossVariant::asym; }
bool normalizes_eeg(LossVariant v) { return v == LossVariant::sym || v == LossVariant::inv_asym; }

Tensor normalize_rows(const Tensor& z) {
  if (z.ndim() != 2) throw DimensionError("normalize_rows: expected a matrix, got " + brainalign::to_string(z.shape()));
  const auto v = z.to_vector();
  const std::size_t d = z.dim(1);
  for (std::size_t r = 0; r < z.dim(0); ++r) {
    double ss = 0;
    for (std::size_t i = 0; i < d; ++i) ss += v[r * d + i] * v[r * d + i];
    if (std::sqrt(ss) < kNormEpsilon) {
      logging::warn("normalize_rows: row " + std::to_string(r) + " has zero norm; left at zero");
      break;
    }
  }
  return l2_normalize(z, kNormEpsilon);
}

Tensor similarity_matrix(const Tensor& image, const Tensor& eeg, LossVariant variant) {
  if (image.ndim() != 2 || eeg.ndim() != 2 || image.dim(1) != eeg.dim(1))
    throw DimensionError("similarity_matrix: embedding dims differ, " + brainalign::to_string(image.shape()) + " vs " +
                         brainalign::to_string(eeg.shape()));
  const Tensor zi = normalizes_image(variant) ? normalize_rows(image) : image;
  const Tensor ze = normalizes_eeg(variant) ? normalize_rows(eeg) : eeg;
  return matmul(zi, transpose(ze));
}

Tensor contrastive_loss(const Tensor& similarity, const Tensor& inv_tau, bool strict_negatives) {
  if (similarity.ndim() != 2 || similarity.dim(0) != similarity.dim(1))
    throw DimensionError("contrastive_loss: expected a square matrix, got " + brainalign::to_string(similarity.shape()));
  const std::size_t B = similarity.dim(0);
  if (B < 2) throw ContractError("contrastive_loss: batch of " + std::to_string(B) + " has no negatives");
  const Tensor logits = mul_scalar(similarity, inv_tau);
  const Tensor pos = diag(logits);
  Tensor rows = logits, cols = transpose(logits);
  if (strict_negatives) {
    Tensor mask = Tensor::zeros({B, B}, logits.dtype());
    visit_dtype(mask.dtype(), [&]<class T>() {
      auto m = mask.mutable_values<T>();
      for (std::size_t i = 0; i < B; ++i) m[i * B + i] = -std::numeric_limits<T>::infinity();
    });
    rows = add(rows, mask);
    cols = add(cols, mask);
  }
  const Tensor image_to_eeg = mean(sub(logsumexp_rows(rows), pos));
  const Tensor eeg_to_image = mean(sub(logsumexp_rows(cols), pos));
  return scale(add(image_to_eeg, eeg_to_image), 0.5);
}

Tensor contrastive_loss(const Tensor& similarity, double tau, bool strict_negatives) {
  if (!(tau > 0) || !std::isfinite(tau)) throw ContractError("temperature must be finite and positive");
  return contrastive_loss(similarity, Tensor::scalar(1.0 / tau, similarity.dtype()), strict_negatives);
}

Temperature::Temperature(const LossConfig& config, DType dtype)
    : learnable_(config.learnable_tau), fixed_(config.temperature), dtype_(dtype) {
  if (!(fixed_ > 0) || !std::isfinite(fixed_)) throw ContractError("temperature must be finite and positive");
  if (learnable_) {
    log_tau_ = Tensor::scalar(std::log(fixed_), dtype);
    log_tau_.set_requires_grad();
  }
}

double Temperature::value() const { return learnable_ ? std::exp(log_tau_.item()) : fixed_; }

Tensor Temperature::inverse() const {
  if (learnable_) return exp(scale(log_tau_, -1.0));
  return Tensor::scalar(1.0 / fixed_, dtype_);
}

}  // namespace brainalign::align
