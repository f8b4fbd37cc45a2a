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

#include <filesystem>
#include <string>

#include "brainalign/evalkit/retrieval.hpp"

namespace brainalign::evalkit {

// Shortest round-trip decimal text of a double.
std::string format_double(double value);

// CSV of the similarity matrix, one line per query row, values separated by
// commas, no header.
std::string similarity_csv(const Tensor& similarity);
Tensor parse_similarity_csv(const std::string& text);

// Grayscale heatmap: one <rect class="cell"> per entry, rows are queries,
// columns candidates, darker means more similar.
std::string similarity_svg(const Tensor& similarity, std::size_t cell_px = 12);

// Writes <stem>.csv and <stem>.svg.
void export_similarity(const RetrievalReport& report, const std::filesystem::path& stem);

}  // namespace brainalign::evalkit
