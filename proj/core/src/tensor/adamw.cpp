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

#include "brainalign/tensor/adamw.hpp"

#include <cmath>
#include <string>

namespace brainalign {

AdamW::AdamW(std::vector<Param> params, AdamWConfig config)
    : params_(std::move(params)), config_(config) {
  if (!(config_.lr >= 0) || !(config_.weight_decay >= 0) || !(config_.eps > 0) ||
      !(config_.beta1 >= 0 && config_.beta1 < 1) || !(config_.beta2 >= 0 && config_.beta2 < 1))
    throw ContractError("AdamW: invalid hyperparameters");
  for (const Param& p : params_) {
    if (!p.value.node()->is_leaf()) throw ContractError("AdamW: parameters must be leaf tensors");
    m_.push_back(Tensor::zeros(p.value.shape(), p.value.dtype()));
    v_.push_back(Tensor::zeros(p.value.shape(), p.value.dtype()));
  }
}

void AdamW::step() {
  for (std::size_t i = 0; i < params_.size(); ++i) {
    const Tensor& p = params_[i].value;
    if (!p.has_grad()) continue;
    bool finite = visit_dtype(p.dtype(), [&]<class T>() {
      for (T g : std::get<std::vector<T>>(*p.node()->grad))
        if (!std::isfinite(g)) return false;
      return true;
    });
    if (!finite)
      throw NumericError("AdamW: non-finite gradient in parameter " + std::to_string(i) + " " +
                         to_string(p.shape()) + "; update rejected");
  }

  ++step_;
  const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(step_));
  const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(step_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    Tensor& p = params_[i].value;
    if (!p.has_grad()) continue;
    const double wd = params_[i].decay ? config_.weight_decay : 0.0;
    visit_dtype(p.dtype(), [&]<class T>() {
      auto theta = p.mutable_values<T>();
      const auto& g = std::get<std::vector<T>>(*p.node()->grad);
      auto m = m_[i].mutable_values<T>();
      auto v = v_[i].mutable_values<T>();
      const T b1 = static_cast<T>(config_.beta1), b2 = static_cast<T>(config_.beta2);
      const T lr = static_cast<T>(config_.lr), eps = static_cast<T>(config_.eps);
      const T decay = static_cast<T>(1.0 - config_.lr * wd);
      const T c1 = static_cast<T>(bc1), c2 = static_cast<T>(bc2);
      for (std::size_t j = 0; j < theta.size(); ++j) {
        if (wd != 0.0) theta[j] *= decay;
        m[j] = b1 * m[j] + (T(1) - b1) * g[j];
        v[j] = b2 * v[j] + (T(1) - b2) * g[j] * g[j];
        const T mhat = m[j] / c1;
        const T vhat = v[j] / c2;
        theta[j] -= lr * mhat / (std::sqrt(vhat) + eps);
      }
    });
  }
}

void AdamW::zero_grad() {
  for (Param& p : params_) p.value.zero_grad();
}

void AdamW::restore(std::size_t step, std::vector<Tensor> m, std::vector<Tensor> v) {
  if (m.size() != params_.size() || v.size() != params_.size())
    throw ContractError("AdamW::restore: moment count does not match parameter count");
  for (std::size_t i = 0; i < params_.size(); ++i)
    if (m[i].shape() != params_[i].value.shape() || v[i].shape() != params_[i].value.shape())
      throw DimensionError("AdamW::restore: moment shape mismatch for parameter " + std::to_string(i));
  step_ = step;
  m_ = std::move(m);
  v_ = std::move(v);
}

}  // namespace brainalign
