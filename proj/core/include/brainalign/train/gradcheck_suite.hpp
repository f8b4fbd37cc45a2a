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

#include <cstdint>
#include <string>
#include <vector>

#include "brainalign/tensor/gradcheck.hpp"

namespace brainalign::train {

// Relative-error bounds: primitive ops are checked tighter than compositions.
inline constexpr double kPrimitiveTolerance = 1e-6;
inline constexpr double kComposedTolerance = 1e-5;

struct GradcheckCase {
  std::string name;
  bool primitive = true;
  GradcheckResult result;

  double tolerance() const { return primitive ? kPrimitiveTolerance : kComposedTolerance; }
  bool passed() const { return result.max_rel_error < tolerance(); }
};

// Every differentiable op on random f64 inputs, then the composed
// encoder -> projector -> contrastive loss pipeline for each loss variant
// and encoder kind.
std::vector<GradcheckCase> run_gradcheck_suite(std::uint64_t seed);

}  // namespace brainalign::train
