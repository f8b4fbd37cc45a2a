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
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "brainalign/dataio/dataset.hpp"
#include "brainalign/train/config.hpp"
#include "brainalign/train/model.hpp"

namespace brainalign::evalkit {

struct RetrievalReport {
  std::size_t n_way = 0;
  std::vector<std::size_t> top_k;
  std::vector<double> accuracy;  // parallel to top_k, each in [0, 1]
  std::size_t repeats = 1;       // distractor resamplings actually run
  std::uint64_t seed = 0;
  // Rank of the true candidate, [repeat][query] flattened, each in [1, n_way].
  std::vector<std::size_t> ranks;
  std::vector<std::size_t> true_index;          // per query, into the candidate pool
  std::vector<std::int64_t> query_concepts;     // per query
  std::vector<std::int64_t> candidate_concepts; // per candidate
  Tensor similarity;                            // [queries, candidates], f64

  std::size_t queries() const { return true_index.size(); }
  // Accuracy for k (must be one of top_k).
  double top(std::size_t k) const;
  // Summary without the similarity matrix.
  nlohmann::json to_json() const;
};

// 1 + number of candidates scoring above the true one, ties broken by
// candidate index (lower index ranks first).
std::size_t rank_of(std::span<const double> scores, std::span<const std::size_t> candidates, std::size_t true_index);

// N-way top-k retrieval over a [queries, pool] score matrix. With n_way
// equal to the pool every query ranks against all candidates once; with a
// smaller n_way each repeat samples n_way - 1 distractors per query (seeded
// by (seed, repeat, query)) and accuracies are averaged over repeats.
RetrievalReport rank_retrieval(const Tensor& scores, std::span<const std::size_t> true_index, std::size_t n_way,
                               std::vector<std::size_t> top_k, std::size_t repeats, std::uint64_t seed);

// Zero-shot evaluation of a model on the test split: every test EEG trial is
// a query; each test concept contributes one candidate, the mean image
// feature of its test pairs. Similarity follows the model's loss variant.
// Throws ZeroShotViolation if a test concept appears in train_concepts.
RetrievalReport evaluate(const train::Model& model, const dataio::PairedDataset& dataset,
                         const train::EvalSettings& settings, const std::vector<std::int64_t>& train_concepts);

// Same scores as evaluate() but without ranking: [queries, candidates].
Tensor query_scores(const train::Model& model, const dataio::PairedDataset& dataset,
                    std::vector<std::size_t>* true_index = nullptr,
                    std::vector<std::int64_t>* candidate_concepts = nullptr);

}  // namespace brainalign::evalkit
