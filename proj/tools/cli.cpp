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

#include "cli.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "brainalign/dataio/container.hpp"
#include "brainalign/dataio/dataset.hpp"
#include "brainalign/dataio/extraction.hpp"
#include "brainalign/dataio/preprocess.hpp"
#include "brainalign/dataio/synth.hpp"
#include "brainalign/error.hpp"
#include "brainalign/evalkit/export.hpp"
#include "brainalign/evalkit/retrieval.hpp"
#include "brainalign/evalkit/sweep.hpp"
#include "brainalign/tensor/ops.hpp"
#include "brainalign/train/config.hpp"
#include "brainalign/train/gradcheck_suite.hpp"
#include "brainalign/train/trainer.hpp"

namespace brainalign::cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  dataio::write_file_atomic(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

// Shared by train, eval and sweep.
struct DataFlags {
  std::string data;
  std::string embeddings;

  void add(CLI::App* app) {
    app->add_option("--data", data, "Dataset manifest (manifest.json)")->required();
    app->add_option("--embeddings", embeddings,
                    "Extraction manifest whose containers replace the dataset's view embeddings");
  }

  dataio::PairedDataset load() const {
    dataio::PairedDataset ds = dataio::load_dataset(data);
    if (!embeddings.empty()) {
      ds.view_embeddings = dataio::load_extracted_embeddings(embeddings);
      ds.validate();
    }
    return ds;
  }
};

struct ConfigFlags {
  std::string config;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> epochs, batch_size;
  std::optional<double> lr;

  void add(CLI::App* app) {
    app->add_option("--config", config, "Training config JSON");
    app->add_option("--set", overrides, "Config override key=value (repeatable, applied after --config)");
    app->add_option("--seed", seed, "Training seed");
    app->add_option("--epochs", epochs, "Epoch count");
    app->add_option("--batch-size", batch_size, "Batch size");
    app->add_option("--lr", lr, "Learning rate");
  }

  // File, then --set, then dedicated flags.
  train::TrainConfig resolve() const {
    train::TrainConfig cfg = config.empty() ? train::TrainConfig{} : train::load_config(config);
    for (const auto& o : overrides) train::apply_override(cfg, o);
    if (seed) cfg.seed = *seed;
    if (epochs) cfg.epochs = *epochs;
    if (batch_size) cfg.batch_size = *batch_size;
    if (lr) cfg.optimizer.lr = *lr;
    cfg.validate();
    return cfg;
  }
};

struct SynthFlags {
  dataio::SynthConfig config;
  std::string out;
  std::string dtype = "f32";
  bool no_pixels = false;
  std::size_t raw_repetitions = 0;

  void add(CLI::App* app) {
    app->add_option("--out", out, "Output directory")->required();
    app->add_option("--concepts", config.train_concepts, "Training concepts")->capture_default_str();
    app->add_option("--test-concepts", config.test_concepts, "Held-out concepts")->capture_default_str();
    app->add_option("--images-per-concept", config.images_per_concept, "Training pairs per concept")
        ->capture_default_str();
    app->add_option("--test-images-per-concept", config.test_images_per_concept, "Test pairs per concept")
        ->capture_default_str();
    app->add_option("--channels", config.eeg_channels, "EEG channels")->capture_default_str();
    app->add_option("--samples", config.eeg_samples, "EEG samples per trial")->capture_default_str();
    app->add_option("--latent-dim", config.latent_dim, "Latent dimension")->capture_default_str();
    app->add_option("--image-size", config.image_size, "Image height and width")->capture_default_str();
    app->add_option("--embed-dim", config.embed_dim, "View embedding dimension")->capture_default_str();
    app->add_option("--views", config.views, "View embedding tables to write")->capture_default_str();
    app->add_flag("--no-pixels", no_pixels, "Omit pixel images");
    app->add_option("--eeg-noise", config.eeg_noise, "EEG noise level")->capture_default_str();
    app->add_option("--pair-jitter", config.pair_jitter, "Per-pair latent jitter")->capture_default_str();
    app->add_option("--trial-gain-spread", config.trial_gain_spread, "Log-normal trial gain spread")
        ->capture_default_str();
    app->add_option("--pixel-noise", config.pixel_noise, "Pixel noise level")->capture_default_str();
    app->add_option("--embed-noise", config.embed_noise, "Embedding noise shared by all views")
        ->capture_default_str();
    app->add_option("--view-noise", config.view_noise, "Independent noise per view table")->capture_default_str();
    app->add_option("--dtype", dtype, "f32 or f64")->capture_default_str();
    app->add_option("--seed", config.seed, "Generator seed")->capture_default_str();
    app->add_option("--raw-repetitions", raw_repetitions,
                    "Also write raw.nbta: this many noisy raw repetitions per trial (0 = off)")
        ->capture_default_str();
  }
};

json cmd_synth(SynthFlags& f, std::ostream& out, bool as_json) {
  f.config.dtype = parse_dtype(f.dtype);
  f.config.pixels = !f.no_pixels;
  const auto syn = dataio::synthesize_dataset(f.config);
  const fs::path manifest = dataio::save_dataset(f.out, syn.dataset);
  json r = {{"manifest", manifest.string()},
            {"pairs", syn.dataset.size()},
            {"train_concepts", syn.dataset.train_concepts.size()},
            {"test_concepts", syn.dataset.test_concepts.size()},
            {"eeg_shape", syn.dataset.eeg.shape()},
            {"views", syn.dataset.view_embeddings.size()}};
  if (f.raw_repetitions) {
    dataio::RawTrialConfig rc;
    rc.repetitions = f.raw_repetitions;
    rc.seed = f.config.seed;
    const auto raw = dataio::simulate_raw_trials(syn.dataset.eeg, rc);
    dataio::Archive a;
    a.meta = {{"stimulus_ids", raw.stimulus_ids}, {"pre_samples", rc.pre_samples}, {"hold", rc.hold},
              {"repetitions", rc.repetitions}};
    a.tensors.emplace_back("trials", raw.trials);
    const fs::path raw_path = fs::path(f.out) / "raw.nbta";
    dataio::write_archive(raw_path, a);
    r["raw"] = raw_path.string();
  }
  if (!as_json) out << "wrote " << manifest.string() << " (" << syn.dataset.size() << " pairs)\n";
  return r;
}

struct PreprocessFlags {
  std::string input, out;
  dataio::PreprocessConfig config;
  bool no_mvnn = false;
  CLI::Option* pre_opt = nullptr;
  CLI::Option* reps_opt = nullptr;

  void add(CLI::App* app) {
    app->add_option("--input", input, "Raw archive with a 'trials' tensor and meta.stimulus_ids")->required();
    app->add_option("--out", out, "Output archive")->required();
    pre_opt = app->add_option("--pre-samples", config.pre_samples,
                              "Pre-stimulus samples per raw trial (default: meta.pre_samples, else 0)");
    app->add_option("--baseline-window", config.baseline_window, "Baseline samples (trailing pre-stimulus)")
        ->capture_default_str();
    app->add_option("--downsample", config.downsample_factor, "Block-mean decimation factor")
        ->capture_default_str();
    reps_opt = app->add_option("--repetitions", config.repetitions,
                               "Repetitions averaged per stimulus (default: meta.repetitions, else 1)");
    app->add_flag("--no-mvnn", no_mvnn, "Skip noise whitening");
    app->add_option("--shrinkage", config.mvnn_shrinkage, "Whitening shrinkage in [0, 1]")->capture_default_str();
  }
};

json cmd_preprocess(PreprocessFlags& f, std::ostream& out, bool as_json) {
  f.config.mvnn_enabled = !f.no_mvnn;
  const dataio::Archive in = dataio::read_archive(f.input);
  std::vector<std::int64_t> ids;
  try {
    ids = in.meta.at("stimulus_ids").get<std::vector<std::int64_t>>();
  } catch (const json::exception& e) {
    throw ContractError(f.input + ": meta.stimulus_ids: " + e.what());
  }
  try {
    if (!f.pre_opt->count() && in.meta.contains("pre_samples"))
      f.config.pre_samples = in.meta["pre_samples"].get<std::size_t>();
    if (!f.reps_opt->count() && in.meta.contains("repetitions"))
      f.config.repetitions = in.meta["repetitions"].get<std::size_t>();
  } catch (const json::exception& e) {
    throw ContractError(f.input + ": meta: " + e.what());
  }
  const auto res = dataio::preprocess(in.at("trials"), ids, f.config);
  dataio::Archive a;
  a.meta = {{"stimulus_ids", res.stimulus_ids},
            {"downsample", f.config.downsample_factor},
            {"baseline_window", f.config.baseline_window},
            {"repetitions", f.config.repetitions},
            {"mvnn", f.config.mvnn_enabled},
            {"shrinkage", f.config.mvnn_shrinkage}};
  a.tensors.emplace_back("trials", res.trials);
  if (res.whitening.defined()) a.tensors.emplace_back("whitening", res.whitening);
  dataio::write_archive(f.out, a);
  if (!as_json) out << "wrote " << f.out << " " << to_string(res.trials.shape()) << "\n";
  return {{"out", f.out}, {"shape", res.trials.shape()}, {"stimuli", res.stimulus_ids.size()}};
}

struct AugmentFlags {
  std::string input, out, pipeline = "default", png_dir, backbone = "RN50";
  std::uint64_t seed = 42, epoch = 0;
  std::size_t batch_size = 64;

  void add(CLI::App* app) {
    app->add_option("--input", input, "Container: images [N,C,H,W] or EEG [N,C,T]")->required();
    app->add_option("--out", out, "Output container: views [K,N,C,H,W] or EEG [N,C,T]")->required();
    app->add_option("--pipeline", pipeline, "Pipeline spec string")->capture_default_str();
    app->add_option("--seed", seed, "Master seed")->capture_default_str();
    app->add_option("--epoch", epoch, "Epoch index in the seed path")->capture_default_str();
    app->add_option("--png-dir", png_dir, "Also write view PNGs and extract.json here (images only)");
    app->add_option("--backbone", backbone, "Backbone named in extract.json")->capture_default_str();
    app->add_option("--batch-size", batch_size, "Extractor batch size named in extract.json")
        ->capture_default_str();
  }
};

json cmd_augment(AugmentFlags& f, std::ostream& out, bool as_json) {
  const auto pipeline = cpa::parse_pipeline(f.pipeline, f.seed);
  pipeline.validate();
  const Tensor x = dataio::read_container(f.input);
  std::vector<std::size_t> ids(x.ndim() ? x.dim(0) : 0);
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = i;
  json r = {{"pipeline", cpa::format_pipeline(pipeline)}, {"out", f.out}};
  if (x.ndim() == 4) {
    const auto views = cpa::augment_images(pipeline, x, ids, f.epoch);
    const Tensor stacked = stack(views);
    dataio::write_container(f.out, stacked);
    r["shape"] = stacked.shape();
    if (!f.png_dir.empty()) {
      const auto m = dataio::export_view_pngs(f.png_dir, stacked, f.backbone, f.batch_size);
      r["extraction_manifest"] = (fs::path(f.png_dir) / "extract.json").string();
      r["pngs"] = m.views.size() * m.images();
    }
  } else if (x.ndim() == 3) {
    if (!f.png_dir.empty()) throw ContractError("augment: --png-dir applies to image inputs only");
    const Tensor y = cpa::augment_eeg(pipeline, x, ids, f.epoch);
    dataio::write_container(f.out, y);
    r["shape"] = y.shape();
  } else {
    throw DimensionError("augment: input must be [N,C,H,W] images or [N,C,T] EEG, got " + to_string(x.shape()));
  }
  if (!as_json) out << "wrote " << f.out << "\n";
  return r;
}

struct TrainFlags {
  DataFlags data;
  ConfigFlags config;
  std::string out;

  void add(CLI::App* app) {
    data.add(app);
    config.add(app);
    app->add_option("--out", out, "Run directory (model.ckpt, runlog.csv, config.json)")->required();
  }
};

json cmd_train(TrainFlags& f, std::ostream& out, bool as_json) {
  const auto cfg = f.config.resolve();
  const auto ds = f.data.load();
  fs::create_directories(f.out);
  const fs::path dir(f.out);
  write_text(dir / "config.json", train::to_json(cfg).dump(2) + "\n");
  train::TrainOptions opts;
  opts.checkpoint = dir / "model.ckpt";
  opts.run_log = dir / "runlog.csv";
  if (!as_json)
    opts.on_epoch = [&out](const train::EpochRecord& r) {
      out << "epoch " << r.epoch << " loss " << std::setprecision(6) << r.loss;
      if (r.top1) out << " top1 " << *r.top1 << " top5 " << r.top5.value_or(0);
      out << "\n";
    };
  const auto res = train::train(cfg, ds, opts);
  const auto& last = res.log.rows.back();
  return {{"checkpoint", opts.checkpoint.string()},
          {"run_log", opts.run_log.string()},
          {"config_digest", train::config_digest(cfg)},
          {"epochs", cfg.epochs},
          {"steps", res.steps},
          {"final_loss", last.loss},
          {"tau", last.tau}};
}

struct EvalFlags {
  DataFlags data;
  std::string checkpoint, out;
  std::optional<std::size_t> n_way, repeats;
  std::optional<std::uint64_t> seed;
  std::vector<std::size_t> top_k;

  void add(CLI::App* app) {
    data.add(app);
    app->add_option("--checkpoint", checkpoint, "Checkpoint from train")->required();
    app->add_option("--out", out, "Report stem: writes <stem>.json, <stem>.csv, <stem>.svg")->required();
    app->add_option("--n-way", n_way, "Candidates per query (default from the checkpoint config)");
    app->add_option("--repeats", repeats, "Distractor resamplings");
    app->add_option("--top-k", top_k, "k values, e.g. --top-k 1 5")->expected(1, -1);
    app->add_option("--seed", seed, "Distractor sampling seed");
  }
};

json cmd_eval(EvalFlags& f, std::ostream& out, bool as_json) {
  const auto ckpt = train::load_checkpoint(f.checkpoint);
  const auto ds = f.data.load();
  train::EvalSettings s = ckpt.config.eval;
  if (f.n_way) s.n_way = *f.n_way;
  if (f.repeats) s.repeats = *f.repeats;
  if (f.seed) s.seed = *f.seed;
  if (!f.top_k.empty()) s.top_k = f.top_k;
  const auto report = evalkit::evaluate(ckpt.model, ds, s, ckpt.train_concepts);
  const fs::path stem(f.out);
  json doc = report.to_json();
  doc["checkpoint"] = f.checkpoint;
  doc["config_digest"] = train::config_digest(ckpt.config);
  fs::path report_path = stem;
  report_path += ".json";
  write_text(report_path, doc.dump(2) + "\n");
  evalkit::export_similarity(report, stem);
  if (!as_json) {
    for (std::size_t i = 0; i < report.top_k.size(); ++i)
      out << "top" << report.top_k[i] << " " << report.accuracy[i] << "\n";
  }
  json r = {{"report", report_path.string()}, {"n_way", report.n_way}, {"queries", report.queries()}};
  r["accuracy"] = doc["accuracy"];
  return r;
}

struct SweepFlags {
  DataFlags data;
  ConfigFlags config;
  std::string axis, out;
  std::vector<std::string> values;
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};

  void add(CLI::App* app) {
    data.add(app);
    config.add(app);
    app->add_option("--axis", axis, "fusion_K, loss_variant, batch_size, temperature or transform_set")
        ->required();
    app->add_option("--values", values, "Axis values")->required()->expected(1, -1);
    app->add_option("--seeds", seeds, "Run seeds")->expected(1, -1)->capture_default_str();
    app->add_option("--out", out, "Output directory (sweep.csv, runs.csv)")->required();
  }
};

json cmd_sweep(SweepFlags& f, std::ostream& out, bool as_json) {
  const auto axis = evalkit::parse_sweep_axis(f.axis);
  const auto cfg = f.config.resolve();
  const auto ds = f.data.load();
  const auto table = evalkit::ablation_sweep(cfg, ds, axis, f.values, f.seeds);
  const fs::path dir(f.out);
  write_text(dir / "sweep.csv", table.to_csv());
  write_text(dir / "runs.csv", table.runs_csv());
  if (!as_json) out << table.to_csv();
  json rows = json::array();
  for (const auto& r : table.rows)
    rows.push_back({{"value", r.value},
                    {"seeds", r.seeds},
                    {"top1_mean", r.top1_mean},
                    {"top1_std", r.top1_std},
                    {"top5_mean", r.top5_mean},
                    {"top5_std", r.top5_std}});
  return {{"axis", evalkit::to_string(axis)}, {"table", (dir / "sweep.csv").string()}, {"rows", rows}};
}

json cmd_gradcheck(std::uint64_t seed, std::ostream& out, bool as_json) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto cases = train::run_gradcheck_suite(seed);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  json rows = json::array();
  bool ok = true;
  if (!as_json) out << std::left << std::setw(34) << "op" << std::setw(14) << "max_rel_err" << "tol\n";
  for (const auto& c : cases) {
    ok = ok && c.passed();
    rows.push_back({{"op", c.name},
                    {"primitive", c.primitive},
                    {"max_rel_error", c.result.max_rel_error},
                    {"tolerance", c.tolerance()},
                    {"passed", c.passed()}});
    if (!as_json) {
      char err[32];
      std::snprintf(err, sizeof err, "%.3e", c.result.max_rel_error);
      out << std::left << std::setw(34) << c.name << std::setw(14) << err << c.tolerance()
          << (c.passed() ? "" : "  FAIL") << "\n";
    }
  }
  if (!ok) {
    std::string failed;
    for (const auto& c : cases)
      if (!c.passed()) failed += (failed.empty() ? "" : ", ") + c.name;
    throw NumericError("gradcheck: analytic and numeric gradients disagree for " + failed);
  }
  return {{"seed", seed}, {"seconds", secs}, {"cases", rows}, {"passed", ok}};
}

std::string error_type(int code) {
  switch (code) {
    case kNumericError: return "numeric";
    case kIoError: return "io";
    default: return "contract";
  }
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"EEG-image contrastive alignment toolkit", "brainalign"};
  app.require_subcommand(1);
  bool as_json = false;
  app.add_flag("--json", as_json, "Print a JSON summary on stdout");

  SynthFlags synth;
  PreprocessFlags prep;
  AugmentFlags aug;
  TrainFlags tr;
  EvalFlags ev;
  SweepFlags sw;
  std::uint64_t gc_seed = 0;

  auto* c_synth = app.add_subcommand("synth", "Generate a synthetic paired EEG-image dataset");
  synth.add(c_synth);
  auto* c_prep = app.add_subcommand("preprocess", "Baseline, downsample, whiten and average raw EEG trials");
  prep.add(c_prep);
  auto* c_aug = app.add_subcommand("augment", "Apply an augmentation pipeline to images or EEG");
  aug.add(c_aug);
  auto* c_train = app.add_subcommand("train", "Train the EEG encoder and projectors");
  tr.add(c_train);
  auto* c_eval = app.add_subcommand("eval", "Zero-shot retrieval evaluation of a checkpoint");
  ev.add(c_eval);
  auto* c_sweep = app.add_subcommand("sweep", "Ablation sweep over one config axis");
  sw.add(c_sweep);
  auto* c_gc = app.add_subcommand("gradcheck", "Finite-difference check of every differentiable op");
  c_gc->add_option("--seed", gc_seed, "Input seed")->capture_default_str();
  for (auto* sub : app.get_subcommands({})) sub->add_flag("--json", as_json, "Print a JSON summary on stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return kOk;
    }
    err << "error: " << e.what() << "\n\n";
    const CLI::App* shown = &app;
    for (auto* sub : app.get_subcommands()) shown = sub;
    err << shown->help();
    return kContractError;
  }

  std::string command;
  std::function<json()> handler;
  if (*c_synth) command = "synth", handler = [&] { return cmd_synth(synth, out, as_json); };
  if (*c_prep) command = "preprocess", handler = [&] { return cmd_preprocess(prep, out, as_json); };
  if (*c_aug) command = "augment", handler = [&] { return cmd_augment(aug, out, as_json); };
  if (*c_train) command = "train", handler = [&] { return cmd_train(tr, out, as_json); };
  if (*c_eval) command = "eval", handler = [&] { return cmd_eval(ev, out, as_json); };
  if (*c_sweep) command = "sweep", handler = [&] { return cmd_sweep(sw, out, as_json); };
  if (*c_gc) command = "gradcheck", handler = [&] { return cmd_gradcheck(gc_seed, out, as_json); };

  int code = kOk;
  std::string message;
  json result;
  try {
    result = handler();
  } catch (const ContractError& e) {
    code = kContractError, message = e.what();
  } catch (const NumericError& e) {
    code = kNumericError, message = e.what();
  } catch (const IoError& e) {
    code = kIoError, message = e.what();
  } catch (const fs::filesystem_error& e) {
    code = kIoError, message = e.what();
  } catch (const json::exception& e) {
    code = kContractError, message = e.what();
  }

  if (as_json) {
    json doc = {{"command", command}, {"exit_code", code}};
    if (code == kOk) {
      doc["status"] = "ok";
      doc["result"] = result;
    } else {
      doc["status"] = "error";
      doc["error"] = {{"type", error_type(code)}, {"message", message}};
    }
    out << doc.dump() << "\n";
  }
  if (code != kOk) err << "error: " << message << "\n";
  return code;
}

}  // namespace brainalign::cli
