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

#include "brainalign/evalkit/retrieval.hpp"

#include <algorithm>
#include <map>
#include <random>

#include "brainalign/parallel.hpp"
#include "brainalign/seed.hpp"
#include "brainalign/tensor/ops.hpp"

namespace brainalign::evalkit {

double RetrievalReport::top(std::size_t k) const {
  for (std::size_t i = 0; i < top_k.size(); ++i)
    if (top_k[i] == k) return accuracy[i];
  throw ContractError("report has no top-" + std::to_string(k) + " accuracy");
}

nlohmann::json RetrievalReport::to_json() const {
  nlohmann::json acc = nlohmann::json::object();
  for (std::size_t i = 0; i < top_k.size(); ++i) acc["top" + std::to_string(top_k[i])] = accuracy[i];
  double mean_rank = 0;
  for (std::size_t r : ranks) mean_rank += double(r);
  if (!ranks.empty()) mean_rank /= double(ranks.size());
  return {
      {"n_way", n_way},
      {"top_k", top_k},
      {"accuracy", acc},
      {"repeats", repeats},
      {"seed", seed},
      {"queries", queries()},
      {"candidates", candidate_concepts.size()},
      {"mean_rank", mean_rank},
      {"query_concepts", query_concepts},
      {"candidate_concepts", candidate_concepts},
      {"ranks", ranks},
  };
}

std::size_t rank_of(std::span<const double> scores, std::span<const std::size_t> candidates, std::size_t true_index) {
  const double target = scores[true_index];
  std::size_t rank = 1;
  for (std::size_t c : candidates) {
    if (c == true_index) continue;
    if (scores[c] > target || (scores[c] == target && c < true_index)) ++rank;
  }
  return rank;
}

RetrievalReport rank_retrieval(const Tensor& scores, std::span<const std::size_t> true_index, std::size_t n_way,
                               std::vector<std::size_t> top_k, std::size_t repeats, std::uint64_t seed) {
  if (scores.ndim() != 2) throw DimensionError("rank_retrieval: scores must be [queries, candidates]");
  const std::size_t M = scores.dim(0), P = scores.dim(1);
  if (true_index.size() != M)
    throw DimensionError("rank_retrieval: " + std::to_string(true_index.size()) + " labels for " + std::to_string(M) +
                         " queries");
  if (n_way < 2) throw ContractError("n_way must be >= 2, got " + std::to_string(n_way));
  if (n_way > P)
    throw ContractError("n_way=" + std::to_string(n_way) + " exceeds the candidate pool of " + std::to_string(P));
  if (top_k.empty()) throw ContractError("top_k must list at least one k");
  for (std::size_t k : top_k)
    if (k == 0) throw ContractError("top_k entries must be >= 1");
  if (repeats == 0) throw ContractError("repeats must be >= 1");
  for (std::size_t t : true_index)
    if (t >= P) throw ContractError("true candidate index out of range");

  RetrievalReport report;
  report.n_way = n_way;
  report.top_k = std::move(top_k);
  report.seed = seed;
  report.repeats = n_way == P ? 1 : repeats;
  report.true_index.assign(true_index.begin(), true_index.end());
  report.similarity = scores.dtype() == DType::f64 ? scores.detach() : scores.to(DType::f64);
  report.ranks.assign(report.repeats * M, 0);

  const auto S = report.similarity.values<double>();
  parallel_for(report.repeats * M, [&](std::size_t job) {
    const std::size_t r = job / M, q = job % M;
    const auto row = S.subspan(q * P, P);
    std::vector<std::size_t> candidates;
    if (n_way == P) {
      candidates.resize(P);
      for (std::size_t i = 0; i < P; ++i) candidates[i] = i;
    } else {
      std::vector<std::size_t> pool;
      pool.reserve(P - 1);
      for (std::size_t i = 0; i < P; ++i)
        if (i != true_index[q]) pool.push_back(i);
      std::mt19937_64 rng(derive_seed({seed, r, q}));
      for (std::size_t i = 0; i + 1 < n_way; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
        std::swap(pool[i], pool[pick(rng)]);
      }
      candidates.assign(pool.begin(), pool.begin() + std::ptrdiff_t(n_way - 1));
      candidates.push_back(true_index[q]);
      std::sort(candidates.begin(), candidates.end());
    }
    report.ranks[job] = rank_of(row, candidates, true_index[q]);
  });

  for (std::size_t k : report.top_k) {
    std::size_t hits = 0;
    for (std::size_t rank : report.ranks) hits += rank <= k;
    report.accuracy.push_back(double(hits) / double(report.ranks.size()));
  }
  return report;
}

Tensor query_scores(const train::Model& model, const dataio::PairedDataset& dataset,
                    std::vector<std::size_t>* true_index, std::vector<std::int64_t>* candidate_concepts) {
  const auto test_rows = dataset.indices(dataio::Split::test);
  const auto concepts = dataset.concepts_in(dataio::Split::test);
  if (test_rows.empty()) throw ContractError("dataset has no test pairs");
  std::map<std::int64_t, std::size_t> slot;
  for (std::size_t i = 0; i < concepts.size(); ++i) slot[concepts[i]] = i;

  // Candidate = mean clean image feature over each concept's test pairs.
  const Tensor features = model.image_features(dataset, test_rows);
  const std::size_t D = features.dim(1), N = concepts.size();
  const auto f = features.to_vector();
  std::vector<double> sums(N * D, 0.0), counts(N, 0.0);
  for (std::size_t i = 0; i < test_rows.size(); ++i) {
    const std::size_t c = slot.at(dataset.concept_ids[test_rows[i]]);
    counts[c] += 1;
    for (std::size_t d = 0; d < D; ++d) sums[c * D + d] += f[i * D + d];
  }
  for (std::size_t c = 0; c < N; ++c)
    for (std::size_t d = 0; d < D; ++d) sums[c * D + d] /= counts[c];
  const Tensor candidates = Tensor::from_values(sums, {N, D}, features.dtype());

  const Tensor eeg = gather_rows(dataset.eeg, test_rows);
  const Tensor z_i = model.project_image(candidates);
  const Tensor z_e = model.project_eeg(model.eeg_features(eeg));
  const Tensor s = align::similarity_matrix(z_i, z_e, model.config().loss.variant);

  if (true_index) {
    true_index->clear();
    for (std::size_t row : test_rows) true_index->push_back(slot.at(dataset.concept_ids[row]));
  }
  if (candidate_concepts) *candidate_concepts = concepts;
  return transpose(s).to(DType::f64);
}

RetrievalReport evaluate(const train::Model& model, const dataio::PairedDataset& dataset,
                         const train::EvalSettings& settings, const std::vector<std::int64_t>& train_concepts) {
  const auto test_concepts = dataset.concepts_in(dataio::Split::test);
  const auto overlap = dataio::concept_overlap(train_concepts, test_concepts);
  if (!overlap.empty())
    throw ZeroShotViolation("zero-shot violation: " + std::to_string(overlap.size()) +
                            " test concept(s) were seen in training, first id " + std::to_string(overlap.front()));
  if (settings.n_way < 2) throw ContractError("n_way must be >= 2, got " + std::to_string(settings.n_way));
  if (settings.n_way > test_concepts.size())
    throw ContractError("n_way=" + std::to_string(settings.n_way) + " exceeds the " +
                        std::to_string(test_concepts.size()) + " test concepts");
  std::vector<std::size_t> truth;
  std::vector<std::int64_t> candidates;
  const Tensor scores = query_scores(model, dataset, &truth, &candidates);
  auto report = rank_retrieval(scores, truth, settings.n_way, settings.top_k, settings.repeats, settings.seed);
  report.candidate_concepts = std::move(candidates);
  for (std::size_t row : dataset.indices(dataio::Split::test)) report.query_concepts.push_back(dataset.concept_ids[row]);
  return report;
}

}  // namespace brainalign::evalkit
