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

#include "brainalign/train/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "brainalign/cpa/pipeline.hpp"

namespace brainalign::train {

using nlohmann::json;

void TrainConfig::validate() const {
  if (batch_size < 2) throw ContractError("batch_size must be >= 2 (the contrastive loss needs negatives)");
  if (epochs == 0) throw ContractError("epochs must be >= 1");
  if (!(optimizer.lr > 0) || !(optimizer.weight_decay >= 0)) throw ContractError("lr must be > 0 and weight_decay >= 0");
  if (!(optimizer.beta1 >= 0 && optimizer.beta1 < 1) || !(optimizer.beta2 >= 0 && optimizer.beta2 < 1))
    throw ContractError("adam betas must lie in [0, 1)");
  if (!(loss.temperature > 0) || !std::isfinite(loss.temperature))
    throw ContractError("loss.temperature must be finite and positive");
  if (eval.n_way < 2) throw ContractError("eval.n_way must be >= 2");
  if (eval.top_k.empty()) throw ContractError("eval.top_k must list at least one k");
  for (std::size_t k : eval.top_k)
    if (k == 0) throw ContractError("eval.top_k entries must be >= 1");
  if (eval.repeats == 0) throw ContractError("eval.repeats must be >= 1");
  if (cpa) cpa::parse_pipeline(pipeline, seed);
}

json to_json(const TrainConfig& c) {
  return json{
      {"batch_size", c.batch_size},
      {"epochs", c.epochs},
      {"seed", c.seed},
      {"dtype", std::string(to_string(c.dtype))},
      {"optimizer",
       {{"lr", c.optimizer.lr},
        {"weight_decay", c.optimizer.weight_decay},
        {"beta1", c.optimizer.beta1},
        {"beta2", c.optimizer.beta2},
        {"eps", c.optimizer.eps}}},
      {"cpa", {{"enabled", c.cpa}, {"pipeline", c.pipeline}}},
      {"eeg_encoder",
       {{"kind", encoders::to_string(c.eeg_encoder.kind)},
        {"temporal_kernel", c.eeg_encoder.temporal_kernel},
        {"features", c.eeg_encoder.features},
        {"pool", c.eeg_encoder.pool},
        {"hidden", c.eeg_encoder.hidden},
        {"output_dim", c.eeg_encoder.output_dim},
        {"dropout", c.eeg_encoder.dropout}}},
      {"image_source",
       {{"kind", encoders::to_string(c.image_source.kind)},
        {"seed", c.image_source.seed},
        {"conv_channels", c.image_source.conv_channels},
        {"pool_grid", c.image_source.pool_grid},
        {"output_dim", c.image_source.output_dim},
        {"views", c.image_source.views}}},
      {"projector",
       {{"kind", align::to_string(c.projector.kind)},
        {"output_dim", c.projector.output_dim},
        {"hidden", c.projector.hidden}}},
      {"loss",
       {{"variant", align::to_string(c.loss.variant)},
        {"temperature", c.loss.temperature},
        {"learnable_tau", c.loss.learnable_tau},
        {"strict_negatives", c.loss.strict_negatives}}},
      {"checkpoint_every", c.checkpoint_every},
      {"eval",
       {{"every", c.eval_every},
        {"n_way", c.eval.n_way},
        {"top_k", c.eval.top_k},
        {"repeats", c.eval.repeats},
        {"seed", c.eval.seed}}},
      {"log", {{"wall_time", c.log_wall_time}}},
  };
}

namespace {

// Reads known keys from one object, rejecting anything else.
class Reader {
 public:
  Reader(const json& doc, std::string prefix) : doc_(doc), prefix_(std::move(prefix)) {
    if (!doc_.is_object()) throw ContractError("config: '" + where() + "' must be an object");
    for (auto it = doc_.begin(); it != doc_.end(); ++it) pending_.push_back(it.key());
  }

  template <class T>
  void get(const char* key, T& out) {
    auto it = doc_.find(key);
    if (it == doc_.end()) return;
    consume(key);
    try {
      if constexpr (std::is_same_v<T, std::size_t> || std::is_same_v<T, std::uint64_t>) {
        if (!it->is_number_unsigned() && !(it->is_number_integer() && it->template get<long long>() >= 0))
          throw ContractError("");
      }
      out = it->template get<T>();
    } catch (const std::exception&) {
      throw ContractError("config: '" + where() + key + "' has the wrong type (" + it->dump() + ")");
    }
  }

  Reader child(const char* key) {
    auto it = doc_.find(key);
    consume(key);
    static const json empty = json::object();
    return Reader(it == doc_.end() ? empty : *it, prefix_ + key + ".");
  }

  void finish() const {
    if (!pending_.empty()) throw ContractError("config: unknown key '" + prefix_ + pending_.front() + "'");
  }

 private:
  std::string where() const { return prefix_; }
  void consume(const char* key) { std::erase(pending_, std::string(key)); }

  const json& doc_;
  std::string prefix_;
  std::vector<std::string> pending_;
};

}  // namespace

TrainConfig config_from_json(const json& doc) {
  TrainConfig c;
  Reader r(doc, "");
  r.get("batch_size", c.batch_size);
  r.get("epochs", c.epochs);
  r.get("seed", c.seed);
  std::string dtype(to_string(c.dtype));
  r.get("dtype", dtype);
  c.dtype = parse_dtype(dtype);
  {
    auto o = r.child("optimizer");
    o.get("lr", c.optimizer.lr);
    o.get("weight_decay", c.optimizer.weight_decay);
    o.get("beta1", c.optimizer.beta1);
    o.get("beta2", c.optimizer.beta2);
    o.get("eps", c.optimizer.eps);
    o.finish();
  }
  {
    auto o = r.child("cpa");
    o.get("enabled", c.cpa);
    o.get("pipeline", c.pipeline);
    o.finish();
  }
  {
    auto o = r.child("eeg_encoder");
    std::string kind = encoders::to_string(c.eeg_encoder.kind);
    o.get("kind", kind);
    c.eeg_encoder.kind = encoders::parse_eeg_encoder_kind(kind);
    o.get("temporal_kernel", c.eeg_encoder.temporal_kernel);
    o.get("features", c.eeg_encoder.features);
    o.get("pool", c.eeg_encoder.pool);
    o.get("hidden", c.eeg_encoder.hidden);
    o.get("output_dim", c.eeg_encoder.output_dim);
    o.get("dropout", c.eeg_encoder.dropout);
    o.finish();
  }
  {
    auto o = r.child("image_source");
    std::string kind = encoders::to_string(c.image_source.kind);
    o.get("kind", kind);
    c.image_source.kind = encoders::parse_image_source_kind(kind);
    o.get("seed", c.image_source.seed);
    o.get("conv_channels", c.image_source.conv_channels);
    o.get("pool_grid", c.image_source.pool_grid);
    o.get("output_dim", c.image_source.output_dim);
    o.get("views", c.image_source.views);
    o.finish();
  }
  {
    auto o = r.child("projector");
    std::string kind = align::to_string(c.projector.kind);
    o.get("kind", kind);
    c.projector.kind = align::parse_projector_kind(kind);
    o.get("output_dim", c.projector.output_dim);
    o.get("hidden", c.projector.hidden);
    o.finish();
  }
  {
    auto o = r.child("loss");
    std::string variant = align::to_string(c.loss.variant);
    o.get("variant", variant);
    c.loss.variant = align::parse_loss_variant(variant);
    o.get("temperature", c.loss.temperature);
    o.get("learnable_tau", c.loss.learnable_tau);
    o.get("strict_negatives", c.loss.strict_negatives);
    o.finish();
  }
  r.get("checkpoint_every", c.checkpoint_every);
  {
    auto o = r.child("eval");
    o.get("every", c.eval_every);
    o.get("n_way", c.eval.n_way);
    o.get("top_k", c.eval.top_k);
    o.get("repeats", c.eval.repeats);
    o.get("seed", c.eval.seed);
    o.finish();
  }
  {
    auto o = r.child("log");
    o.get("wall_time", c.log_wall_time);
    o.finish();
  }
  r.finish();
  return c;
}

TrainConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError("config " + path + ": " + e.what(), e.byte);
  }
  return config_from_json(doc);
}

void apply_override(TrainConfig& config, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0)
    throw ContractError("override '" + std::string(assignment) + "' is not of the form key=value");
  const std::string key(assignment.substr(0, eq));
  const std::string text(assignment.substr(eq + 1));
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;

  json doc = to_json(config);
  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot - start);
    if (!node->is_object() || !node->contains(part)) throw ContractError("config: unknown key '" + key + "'");
    node = &(*node)[part];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  *node = value;
  config = config_from_json(doc);
}

std::string config_digest(const TrainConfig& config) {
  const std::string text = to_json(config).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) h = (h ^ ch) * 0x100000001b3ULL;
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace brainalign::train
