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

#include "brainalign/evalkit/sweep.hpp"

#include <cmath>
#include <sstream>

#include "brainalign/cpa/pipeline.hpp"
#include "brainalign/evalkit/export.hpp"
#include "brainalign/evalkit/retrieval.hpp"
#include "brainalign/train/trainer.hpp"

namespace brainalign::evalkit {

std::string to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::fusion_k: return "fusion_K";
    case SweepAxis::loss_variant: return "loss_variant";
    case SweepAxis::batch_size: return "batch_size";
    case SweepAxis::temperature: return "temperature";
    default: return "transform_set";
  }
}

SweepAxis parse_sweep_axis(const std::string& name) {
  if (name == "fusion_K" || name == "fusion_k") return SweepAxis::fusion_k;
  if (name == "loss_variant") return SweepAxis::loss_variant;
  if (name == "batch_size") return SweepAxis::batch_size;
  if (name == "temperature") return SweepAxis::temperature;
  if (name == "transform_set") return SweepAxis::transform_set;
  throw ContractError("unknown sweep axis '" + name +
                      "' (expected fusion_K, loss_variant, batch_size, temperature or transform_set)");
}

namespace {

std::size_t parse_count(const std::string& value, const char* what) {
  std::size_t pos = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(value, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != value.size() || value.empty() || value[0] == '-')
    throw ContractError(std::string(what) + " value '" + value + "' is not a positive integer");
  return static_cast<std::size_t>(v);
}

double parse_real(const std::string& value, const char* what) {
  std::size_t pos = 0;
  double v = 0;
  try {
    v = std::stod(value, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != value.size() || value.empty()) throw ContractError(std::string(what) + " value '" + value + "' is not a number");
  return v;
}

// The base pipeline's spec of the same kind, or the kind's default.
cpa::ImageTransformSpec spec_like(const cpa::AugmentationPipeline& base, const cpa::ImageTransformSpec& kind) {
  for (const auto& s : base.image)
    if (s.index() == kind.index()) return s;
  return kind;
}

cpa::AugmentationPipeline base_pipeline(const train::TrainConfig& config) {
  return config.cpa ? cpa::parse_pipeline(config.pipeline, config.seed) : cpa::default_pipeline(config.seed);
}

double mean_of(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return s / double(v.size());
}

double std_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double ss = 0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / double(v.size() - 1));
}

}  // namespace

train::TrainConfig apply_axis(const train::TrainConfig& base, SweepAxis axis, const std::string& value) {
  train::TrainConfig c = base;
  switch (axis) {
    case SweepAxis::fusion_k: {
      const std::size_t k = parse_count(value, "fusion_K");
      if (k == 0) throw ContractError("fusion_K must be >= 1");
      if (c.image_source.kind == encoders::ImageSourceKind::embedding_files) {
        c.image_source.views = k;
        break;
      }
      const auto all = cpa::all_image_transforms();
      if (k > all.size())
        throw ContractError("fusion_K=" + value + " exceeds the " + std::to_string(all.size()) + " image transforms");
      auto p = base_pipeline(c);
      std::vector<cpa::ImageTransformSpec> specs;
      for (std::size_t i = 0; i < k; ++i) specs.push_back(spec_like(p, all[i]));
      p.image = std::move(specs);
      c.cpa = true;
      c.pipeline = cpa::format_pipeline(p);
      break;
    }
    case SweepAxis::loss_variant:
      if (value == "vanilla") {
        c.cpa = false;
        c.projector.kind = align::ProjectorKind::identity;
        c.loss.variant = align::LossVariant::plain;
        if (c.image_source.kind == encoders::ImageSourceKind::reference_encoder)
          c.eeg_encoder.output_dim = c.image_source.output_dim;
      } else {
        c.loss.variant = align::parse_loss_variant(value);
      }
      break;
    case SweepAxis::batch_size:
      c.batch_size = parse_count(value, "batch_size");
      break;
    case SweepAxis::temperature:
      c.loss.temperature = parse_real(value, "temperature");
      break;
    case SweepAxis::transform_set: {
      auto p = base_pipeline(c);
      std::vector<cpa::ImageTransformSpec> specs;
      std::size_t start = 0;
      while (true) {
        const auto plus = value.find('+', start);
        const std::string name = value.substr(start, plus - start);
        bool found = false;
        for (const auto& kind : cpa::all_image_transforms())
          if (cpa::kind_name(kind) == name) {
            specs.push_back(spec_like(p, kind));
            found = true;
          }
        if (!found) throw ContractError("transform_set: unknown image transform '" + name + "'");
        if (plus == std::string::npos) break;
        start = plus + 1;
      }
      p.image = std::move(specs);
      c.cpa = true;
      c.pipeline = cpa::format_pipeline(p);
      break;
    }
  }
  c.validate();
  return c;
}

std::string SweepTable::to_csv() const {
  std::ostringstream os;
  os << "axis,value,seeds,top1_mean,top1_std,top5_mean,top5_std\n";
  for (const auto& r : rows)
    os << to_string(axis) << ',' << r.value << ',' << r.seeds << ',' << format_double(r.top1_mean) << ','
       << format_double(r.top1_std) << ',' << format_double(r.top5_mean) << ',' << format_double(r.top5_std) << '\n';
  return os.str();
}

std::string SweepTable::runs_csv() const {
  std::ostringstream os;
  os << "axis,value,seed,top1,top5,final_loss\n";
  for (const auto& r : runs)
    os << to_string(axis) << ',' << r.value << ',' << r.seed << ',' << format_double(r.top1) << ','
       << format_double(r.top5) << ',' << format_double(r.final_loss) << '\n';
  return os.str();
}

SweepTable ablation_sweep(const train::TrainConfig& base, const dataio::PairedDataset& dataset, SweepAxis axis,
                          const std::vector<std::string>& values, const std::vector<std::uint64_t>& seeds) {
  if (values.empty()) throw ContractError("sweep needs at least one axis value");
  if (seeds.empty()) throw ContractError("sweep needs at least one seed");
  SweepTable table;
  table.axis = axis;
  const auto train_concepts = dataset.concepts_in(dataio::Split::train);
  for (const auto& value : values) {
    train::TrainConfig config = apply_axis(base, axis, value);
    // The identity projector needs H_E and H_I of equal width.
    if (config.projector.kind == align::ProjectorKind::identity) {
      if (config.image_source.kind == encoders::ImageSourceKind::embedding_files && !dataset.view_embeddings.empty())
        config.eeg_encoder.output_dim = dataset.view_embeddings[0].dim(1);
      else
        config.eeg_encoder.output_dim = config.image_source.output_dim;
    }
    std::vector<double> top1, top5;
    for (std::uint64_t seed : seeds) {
      config.seed = seed;
      const auto result = train::train(config, dataset);
      train::EvalSettings settings = config.eval;
      settings.top_k = {1, 5};
      const auto report = evaluate(result.model, dataset, settings, train_concepts);
      SweepRun run{value, seed, report.top(1), report.top(5), result.log.rows.back().loss};
      top1.push_back(run.top1);
      top5.push_back(run.top5);
      table.runs.push_back(run);
    }
    table.rows.push_back({value, seeds.size(), mean_of(top1), std_of(top1), mean_of(top5), std_of(top5)});
  }
  return table;
}

}  // namespace brainalign::evalkit
