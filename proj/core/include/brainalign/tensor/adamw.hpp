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
#include <vector>

#include "brainalign/tensor/tensor.hpp"

namespace brainalign {

struct AdamWConfig {
  double lr = 1e-4;
  double weight_decay = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// AdamW with decoupled weight decay: the parameter is shrunk by
// (1 - lr * weight_decay) directly, then the bias-corrected Adam step is
// applied. Moment buffers mirror parameter shapes and dtypes.
class AdamW {
 public:
  struct Param {
    Tensor value;
    bool decay = true;  // false exempts the tensor from weight decay
  };

  AdamW(std::vector<Param> params, AdamWConfig config);

  // Applies one update from the accumulated grads. Parameters without a
  // grad are skipped. A non-finite grad rejects the whole update (no
  // parameter or moment changes) with a NumericError naming the tensor.
  void step();
  void zero_grad();

  std::size_t step_count() const { return step_; }
  const AdamWConfig& config() const { return config_; }
  const std::vector<Param>& params() const { return params_; }

  // Moment buffers, for checkpointing.
  const std::vector<Tensor>& first_moments() const { return m_; }
  const std::vector<Tensor>& second_moments() const { return v_; }
  void restore(std::size_t step, std::vector<Tensor> m, std::vector<Tensor> v);

 private:
  std::vector<Param> params_;
  AdamWConfig config_;
  std::vector<Tensor> m_, v_;
  std::size_t step_ = 0;
};

}  // namespace brainalign
