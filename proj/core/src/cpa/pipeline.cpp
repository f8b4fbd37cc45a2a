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

#include "brainalign/cpa/pipeline.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <map>

#include "brainalign/parallel.hpp"
#include "brainalign/seed.hpp"

namespace brainalign::cpa {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

// Splits on sep outside parentheses.
std::vector<std::string_view> split_top(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '(') ++depth;
    if (s[i] == ')') --depth;
    if (depth < 0) throw ContractError("pipeline: unbalanced ')' in '" + std::string(s) + "'");
    if (s[i] == sep && depth == 0) {
      out.push_back(trim(s.substr(start, i - start)));
      start = i + 1;
    }
  }
  if (depth != 0) throw ContractError("pipeline: unbalanced '(' in '" + std::string(s) + "'");
  out.push_back(trim(s.substr(start)));
  return out;
}

struct Call {
  std::string kind;
  std::map<std::string, double, std::less<>> args;
};

double parse_number(std::string_view text, std::string_view context) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw ContractError("pipeline: '" + std::string(text) + "' is not a number in " + std::string(context));
  return v;
}

Call parse_call(std::string_view item) {
  Call call;
  const auto open = item.find('(');
  if (open == std::string_view::npos) {
    call.kind = std::string(item);
    return call;
  }
  if (item.back() != ')') throw ContractError("pipeline: expected ')' at the end of '" + std::string(item) + "'");
  call.kind = std::string(trim(item.substr(0, open)));
  const auto body = trim(item.substr(open + 1, item.size() - open - 2));
  if (body.empty()) return call;
  for (auto kv : split_top(body, ',')) {
    const auto eq = kv.find('=');
    if (eq == std::string_view::npos) throw ContractError("pipeline: expected key=value, got '" + std::string(kv) + "'");
    auto key = std::string(trim(kv.substr(0, eq)));
    call.args[key] = parse_number(trim(kv.substr(eq + 1)), item);
  }
  return call;
}

class ArgReader {
 public:
  explicit ArgReader(Call& call) : call_(call) {}
  double real(const char* key, double fallback) {
    auto it = call_.args.find(key);
    if (it == call_.args.end()) return fallback;
    double v = it->second;
    call_.args.erase(it);
    return v;
  }
  std::size_t count(const char* key, std::size_t fallback) {
    double v = real(key, double(fallback));
    if (v < 0 || v != std::floor(v)) throw ContractError("pipeline: " + call_.kind + "." + key + " must be a non-negative integer");
    return static_cast<std::size_t>(v);
  }
  void finish() const {
    if (!call_.args.empty())
      throw ContractError("pipeline: unknown parameter '" + call_.args.begin()->first + "' for " + call_.kind);
  }

 private:
  Call& call_;
};

ImageTransformSpec make_image(Call call) {
  ArgReader r(call);
  ImageTransformSpec spec;
  if (call.kind == "gaussian_blur") spec = GaussianBlur{r.real("sigma", GaussianBlur{}.sigma)};
  else if (call.kind == "gaussian_noise") spec = GaussianNoise{r.real("sigma", GaussianNoise{}.sigma)};
  else if (call.kind == "low_resolution") spec = LowResolution{r.count("factor", LowResolution{}.factor)};
  else if (call.kind == "mosaic") spec = Mosaic{r.count("cell", Mosaic{}.cell)};
  else if (call.kind == "color_jitter")
    spec = ColorJitter{r.real("brightness", ColorJitter{}.brightness), r.real("contrast", ColorJitter{}.contrast)};
  else if (call.kind == "grayscale") spec = Grayscale{r.real("strength", Grayscale{}.strength)};
  else if (call.kind == "random_crop") spec = RandomCrop{r.real("fraction", RandomCrop{}.fraction)};
  else throw ContractError("pipeline: unknown image transform '" + call.kind + "'");
  r.finish();
  validate(spec);
  return spec;
}

EEGTransformSpec make_eeg(Call call) {
  ArgReader r(call);
  EEGTransformSpec spec;
  if (call.kind == "channel_dropout") spec = ChannelDropout{r.real("p", ChannelDropout{}.p)};
  else if (call.kind == "noise_addition") spec = NoiseAddition{r.real("sigma", NoiseAddition{}.relative_sigma)};
  else if (call.kind == "smoothing") spec = Smoothing{r.count("window", Smoothing{}.window)};
  else if (call.kind == "temporal_shift") spec = TemporalShift{r.count("max_shift", TemporalShift{}.max_shift)};
  else throw ContractError("pipeline: unknown EEG transform '" + call.kind + "'");
  r.finish();
  validate(spec);
  return spec;
}

std::string num(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string format_spec(const ImageTransformSpec& spec) {
  struct V {
    std::string operator()(const GaussianBlur& s) const { return "gaussian_blur(sigma=" + num(s.sigma) + ")"; }
    std::string operator()(const GaussianNoise& s) const { return "gaussian_noise(sigma=" + num(s.sigma) + ")"; }
    std::string operator()(const LowResolution& s) const { return "low_resolution(factor=" + std::to_string(s.factor) + ")"; }
    std::string operator()(const Mosaic& s) const { return "mosaic(cell=" + std::to_string(s.cell) + ")"; }
    std::string operator()(const ColorJitter& s) const {
      return "color_jitter(brightness=" + num(s.brightness) + ",contrast=" + num(s.contrast) + ")";
    }
    std::string operator()(const Grayscale& s) const { return "grayscale(strength=" + num(s.strength) + ")"; }
    std::string operator()(const RandomCrop& s) const { return "random_crop(fraction=" + num(s.fraction) + ")"; }
  };
  return std::visit(V{}, spec);
}

std::string format_spec(const EEGTransformSpec& spec) {
  struct V {
    std::string operator()(const ChannelDropout& s) const { return "channel_dropout(p=" + num(s.p) + ")"; }
    std::string operator()(const NoiseAddition& s) const { return "noise_addition(sigma=" + num(s.relative_sigma) + ")"; }
    std::string operator()(const Smoothing& s) const { return "smoothing(window=" + std::to_string(s.window) + ")"; }
    std::string operator()(const TemporalShift& s) const {
      return "temporal_shift(max_shift=" + std::to_string(s.max_shift) + ")";
    }
  };
  return std::visit(V{}, spec);
}

void check_batch(const Tensor& t, std::size_t rank, std::span<const std::size_t> ids, const char* what) {
  if (t.ndim() != rank)
    throw DimensionError(std::string(what) + ": expected rank " + std::to_string(rank) + ", got " + to_string(t.shape()));
  if (t.dim(0) != ids.size())
    throw DimensionError(std::string(what) + ": batch has " + std::to_string(t.dim(0)) + " rows but " +
                         std::to_string(ids.size()) + " sample ids");
}

}  // namespace

void AugmentationPipeline::validate() const {
  if (image.empty()) throw ContractError("augmentation pipeline needs at least one image view");
  for (const auto& s : image) cpa::validate(s);
  cpa::validate(eeg);
}

std::uint64_t AugmentationPipeline::seed_for(std::uint64_t epoch, std::uint64_t sample, std::uint64_t view) const {
  return derive_seed({master_seed, epoch, sample, view});
}

AugmentationPipeline default_pipeline(std::uint64_t master_seed) {
  AugmentationPipeline p;
  p.image = {GaussianBlur{}, GaussianNoise{}, LowResolution{}, Mosaic{}};
  p.eeg = Smoothing{};
  p.master_seed = master_seed;
  return p;
}

std::vector<ImageTransformSpec> all_image_transforms() {
  return {GaussianBlur{}, GaussianNoise{}, LowResolution{}, Mosaic{}, ColorJitter{}, Grayscale{}, RandomCrop{}};
}

AugmentationPipeline parse_pipeline(std::string_view text, std::uint64_t master_seed) {
  AugmentationPipeline p = default_pipeline(master_seed);
  text = trim(text);
  if (text.empty() || text == "default") return p;
  bool saw_image = false, saw_eeg = false;
  for (auto section : split_top(text, ';')) {
    if (section.empty()) continue;
    const auto eq = section.find('=');
    if (eq == std::string_view::npos)
      throw ContractError("pipeline: expected 'image=...' or 'eeg=...', got '" + std::string(section) + "'");
    const auto key = trim(section.substr(0, eq));
    const auto body = trim(section.substr(eq + 1));
    if (key == "image") {
      if (saw_image) throw ContractError("pipeline: duplicate image section");
      saw_image = true;
      p.image.clear();
      for (auto item : split_top(body, ',')) {
        if (item.empty()) throw ContractError("pipeline: empty image transform");
        p.image.push_back(make_image(parse_call(item)));
      }
    } else if (key == "eeg") {
      if (saw_eeg) throw ContractError("pipeline: duplicate eeg section");
      saw_eeg = true;
      auto items = split_top(body, ',');
      if (items.size() != 1 || items[0].empty())
        throw ContractError("pipeline: exactly one EEG transform is applied, got '" + std::string(body) + "'");
      p.eeg = make_eeg(parse_call(items[0]));
    } else {
      throw ContractError("pipeline: unknown section '" + std::string(key) + "'");
    }
  }
  p.validate();
  return p;
}

std::string format_pipeline(const AugmentationPipeline& pipeline) {
  std::string out = "image=";
  for (std::size_t k = 0; k < pipeline.image.size(); ++k) out += (k ? "," : "") + format_spec(pipeline.image[k]);
  return out + ";eeg=" + format_spec(pipeline.eeg);
}

std::vector<Tensor> augment_images(const AugmentationPipeline& pipeline, const Tensor& images,
                                   std::span<const std::size_t> sample_ids, std::uint64_t epoch) {
  pipeline.validate();
  check_batch(images, 4, sample_ids, "augment_images");
  const std::size_t B = images.dim(0), C = images.dim(1), H = images.dim(2), W = images.dim(3);
  const std::size_t n = C * H * W;
  const auto src = images.to_vector();
  for (double v : src)
    if (!(v >= 0.0 && v <= 1.0)) throw ContractError("augment_images: pixel values must lie in [0, 1]");
  std::vector<Tensor> views;
  for (std::size_t k = 0; k < pipeline.views(); ++k) {
    std::vector<double> out(src.size());
    parallel_for(B, [&](std::size_t b) {
      std::vector<double> px(src.begin() + std::ptrdiff_t(b * n), src.begin() + std::ptrdiff_t((b + 1) * n));
      apply_image_inplace(pipeline.image[k], px, C, H, W, pipeline.seed_for(epoch, sample_ids[b], k));
      std::copy(px.begin(), px.end(), out.begin() + std::ptrdiff_t(b * n));
    });
    views.push_back(Tensor::from_values(out, images.shape(), images.dtype()));
  }
  return views;
}

Tensor augment_eeg(const AugmentationPipeline& pipeline, const Tensor& eeg, std::span<const std::size_t> sample_ids,
                   std::uint64_t epoch) {
  check_batch(eeg, 3, sample_ids, "augment_eeg");
  const std::size_t B = eeg.dim(0), C = eeg.dim(1), T = eeg.dim(2);
  cpa::validate(pipeline.eeg, T);
  const auto src = eeg.to_vector();
  std::vector<double> out(src.size());
  parallel_for(B, [&](std::size_t b) {
    std::vector<double> x(src.begin() + std::ptrdiff_t(b * C * T), src.begin() + std::ptrdiff_t((b + 1) * C * T));
    apply_eeg_inplace(pipeline.eeg, x, C, T, pipeline.seed_for(epoch, sample_ids[b], kEegView));
    std::copy(x.begin(), x.end(), out.begin() + std::ptrdiff_t(b * C * T));
  });
  return Tensor::from_values(out, eeg.shape(), eeg.dtype());
}

ViewBatch make_views(const AugmentationPipeline& pipeline, const std::optional<Tensor>& images, const Tensor& eeg,
                     std::span<const std::size_t> sample_ids, std::uint64_t epoch) {
  ViewBatch batch;
  if (images) {
    if (images->dim(0) != eeg.dim(0))
      throw DimensionError("make_views: image batch " + to_string(images->shape()) + " and EEG batch " +
                           to_string(eeg.shape()) + " are not aligned");
    batch.image_views = augment_images(pipeline, *images, sample_ids, epoch);
  }
  batch.eeg = augment_eeg(pipeline, eeg, sample_ids, epoch);
  return batch;
}

}  // namespace brainalign::cpa
