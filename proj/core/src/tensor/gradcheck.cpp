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

#include "brainalign/tensor/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace brainalign {

GradcheckResult gradcheck(const std::function<Tensor(const std::vector<Tensor>&)>& fn,
                          std::vector<Tensor> inputs, const GradcheckOptions& options) {
  for (Tensor& t : inputs) {
    if (t.dtype() != DType::f64) throw ContractError("gradcheck: inputs must be f64");
    t.zero_grad();
    t.set_requires_grad(true);
  }
  Tensor out = fn(inputs);
  out.backward();

  GradcheckResult result;
  const double h = options.step;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    std::vector<double> analytic = inputs[k].grad().to_vector();
    auto x = inputs[k].mutable_values<double>();
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double orig = x[i];
      auto eval_at = [&](double offset) {
        x[i] = orig + offset;
        return fn(inputs).item();
      };
      const double fm2 = eval_at(-2 * h), fm1 = eval_at(-h), fp1 = eval_at(h), fp2 = eval_at(2 * h);
      x[i] = orig;
      const double numeric = (fm2 - 8 * fm1 + 8 * fp1 - fp2) / (12 * h);
      const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), options.floor});
      const double rel = std::abs(analytic[i] - numeric) / denom;
      if (rel > result.max_rel_error || !std::isfinite(rel)) {
        result = {std::isfinite(rel) ? rel : INFINITY, k, i, analytic[i], numeric};
      }
    }
  }
  return result;
}

}  // namespace brainalign
