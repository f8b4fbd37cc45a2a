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

#include "brainalign/cpa/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace brainalign::cpa {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

// Reflect padding without edge repetition: -1 -> 1, n -> n-2.
std::size_t reflect(std::ptrdiff_t i, std::size_t n) {
  if (n == 1) return 0;
  const auto period = static_cast<std::ptrdiff_t>(2 * (n - 1));
  i %= period;
  if (i < 0) i += period;
  if (i >= static_cast<std::ptrdiff_t>(n)) i = period - i;
  return static_cast<std::size_t>(i);
}

// out[t] = x[t] + sum_j w_j (x[t + j - r] - x[t]); exact on constants.
void convolve_line(const double* src, double* dst, std::size_t n, std::size_t stride,
                   const std::vector<double>& weights) {
  const auto r = static_cast<std::ptrdiff_t>(weights.size() / 2);
  for (std::size_t t = 0; t < n; ++t) {
    const double centre = src[t * stride];
    double acc = 0;
    for (std::ptrdiff_t j = -r; j <= r; ++j)
      acc += weights[std::size_t(j + r)] * (src[reflect(std::ptrdiff_t(t) + j, n) * stride] - centre);
    dst[t * stride] = centre + acc;
  }
}

void clamp01(std::vector<double>& v) {
  for (double& x : v) x = std::clamp(x, 0.0, 1.0);
}

void blur(std::vector<double>& px, std::size_t C, std::size_t H, std::size_t W, double sigma) {
  if (sigma == 0.0) return;
  const auto r = static_cast<std::size_t>(std::ceil(2.0 * sigma));
  std::vector<double> w(2 * r + 1);
  double total = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double d = double(i) - double(r);
    total += w[i] = std::exp(-d * d / (2 * sigma * sigma));
  }
  for (double& x : w) x /= total;
  std::vector<double> tmp(px.size());
  for (std::size_t c = 0; c < C; ++c) {
    for (std::size_t h = 0; h < H; ++h)
      convolve_line(&px[(c * H + h) * W], &tmp[(c * H + h) * W], W, 1, w);
    for (std::size_t x = 0; x < W; ++x) convolve_line(&tmp[c * H * W + x], &px[c * H * W + x], H, W, w);
  }
}

void low_resolution(std::vector<double>& px, std::size_t C, std::size_t H, std::size_t W, std::size_t f) {
  if (f == 1) return;
  const std::size_t h2 = std::max<std::size_t>(1, H / f), w2 = std::max<std::size_t>(1, W / f);
  std::vector<double> out(px.size());
  for (std::size_t c = 0; c < C; ++c)
    for (std::size_t y = 0; y < H; ++y) {
      const std::size_t sy = (y * h2 / H) * H / h2;
      for (std::size_t x = 0; x < W; ++x) {
        const std::size_t sx = (x * w2 / W) * W / w2;
        out[(c * H + y) * W + x] = px[(c * H + sy) * W + sx];
      }
    }
  px.swap(out);
}

void mosaic(std::vector<double>& px, std::size_t C, std::size_t H, std::size_t W, std::size_t cell) {
  if (cell == 1) return;
  for (std::size_t c = 0; c < C; ++c)
    for (std::size_t y0 = 0; y0 < H; y0 += cell)
      for (std::size_t x0 = 0; x0 < W; x0 += cell) {
        const std::size_t y1 = std::min(H, y0 + cell), x1 = std::min(W, x0 + cell);
        double acc = 0;
        for (std::size_t y = y0; y < y1; ++y)
          for (std::size_t x = x0; x < x1; ++x) acc += px[(c * H + y) * W + x];
        const double m = acc / double((y1 - y0) * (x1 - x0));
        for (std::size_t y = y0; y < y1; ++y)
          for (std::size_t x = x0; x < x1; ++x) px[(c * H + y) * W + x] = m;
      }
}

std::vector<double> luma(const std::vector<double>& px, std::size_t C, std::size_t HW) {
  std::vector<double> l(HW, 0.0);
  if (C == 3) {
    for (std::size_t i = 0; i < HW; ++i) l[i] = 0.299 * px[i] + 0.587 * px[HW + i] + 0.114 * px[2 * HW + i];
  } else {
    for (std::size_t c = 0; c < C; ++c)
      for (std::size_t i = 0; i < HW; ++i) l[i] += px[c * HW + i];
    for (double& v : l) v /= double(C);
  }
  return l;
}

void color_jitter(std::vector<double>& px, std::size_t C, std::size_t HW, const ColorJitter& j,
                  std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double b = 1.0 + j.brightness * u(rng);
  const double k = 1.0 + j.contrast * u(rng);
  if (j.brightness > 0) {
    for (double& v : px) v = std::clamp(v * b, 0.0, 1.0);
  }
  if (j.contrast > 0) {
    const auto l = luma(px, C, HW);
    double m = 0;
    for (double v : l) m += v;
    m /= double(HW);
    for (double& v : px) v = std::clamp((v - m) * k + m, 0.0, 1.0);
  }
}

void grayscale(std::vector<double>& px, std::size_t C, std::size_t HW, double strength) {
  if (strength == 0.0 || C == 1) return;
  const auto l = luma(px, C, HW);
  for (std::size_t c = 0; c < C; ++c)
    for (std::size_t i = 0; i < HW; ++i) {
      double& v = px[c * HW + i];
      v = strength == 1.0 ? l[i] : v + strength * (l[i] - v);
    }
}

void random_crop(std::vector<double>& px, std::size_t C, std::size_t H, std::size_t W, double fraction,
                 std::mt19937_64& rng) {
  if (fraction == 1.0) return;
  const auto ch = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(fraction * double(H))));
  const auto cw = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(fraction * double(W))));
  std::uniform_int_distribution<std::size_t> oy_d(0, H - ch), ox_d(0, W - cw);
  const std::size_t oy = oy_d(rng), ox = ox_d(rng);
  std::vector<double> out(px.size());
  for (std::size_t c = 0; c < C; ++c)
    for (std::size_t y = 0; y < H; ++y)
      for (std::size_t x = 0; x < W; ++x)
        out[(c * H + y) * W + x] = px[(c * H + oy + y * ch / H) * W + ox + x * cw / W];
  px.swap(out);
}

std::vector<double> to_doubles(const Tensor& t) { return t.to_vector(); }

}  // namespace

void validate(const ImageTransformSpec& spec) {
  std::visit(overloaded{
                 [](const GaussianBlur& s) {
                   if (!(s.sigma >= 0 && std::isfinite(s.sigma))) throw ContractError("gaussian_blur: sigma must be >= 0");
                 },
                 [](const GaussianNoise& s) {
                   if (!(s.sigma >= 0 && std::isfinite(s.sigma))) throw ContractError("gaussian_noise: sigma must be >= 0");
                 },
                 [](const LowResolution& s) {
                   if (s.factor < 1) throw ContractError("low_resolution: factor must be >= 1");
                 },
                 [](const Mosaic& s) {
                   if (s.cell < 1) throw ContractError("mosaic: cell size must be >= 1");
                 },
                 [](const ColorJitter& s) {
                   if (!(s.brightness >= 0 && s.brightness <= 1) || !(s.contrast >= 0 && s.contrast <= 1))
                     throw ContractError("color_jitter: ranges must be in [0, 1]");
                 },
                 [](const Grayscale& s) {
                   if (!(s.strength >= 0 && s.strength <= 1)) throw ContractError("grayscale: strength must be in [0, 1]");
                 },
                 [](const RandomCrop& s) {
                   if (!(s.fraction > 0 && s.fraction <= 1)) throw ContractError("random_crop: fraction must be in (0, 1]");
                 },
             },
             spec);
}

void validate(const EEGTransformSpec& spec, std::size_t samples) {
  std::visit(overloaded{
                 [](const ChannelDropout& s) {
                   if (!(s.p >= 0 && s.p <= 1)) throw ContractError("channel_dropout: p must be in [0, 1]");
                 },
                 [](const NoiseAddition& s) {
                   if (!(s.relative_sigma >= 0 && std::isfinite(s.relative_sigma)))
                     throw ContractError("noise_addition: sigma must be >= 0");
                 },
                 [samples](const Smoothing& s) {
                   if (s.window < 1 || s.window % 2 == 0) throw ContractError("smoothing: window must be odd and >= 1");
                   if (samples && s.window > samples)
                     throw ContractError("smoothing: window " + std::to_string(s.window) + " exceeds trial length " +
                                         std::to_string(samples));
                 },
                 [samples](const TemporalShift& s) {
                   if (samples && s.max_shift >= samples)
                     throw ContractError("temporal_shift: |shift| must be < trial length " + std::to_string(samples));
                 },
             },
             spec);
}

std::string kind_name(const ImageTransformSpec& spec) {
  static const char* names[] = {"gaussian_blur", "gaussian_noise", "low_resolution", "mosaic",
                                "color_jitter",  "grayscale",      "random_crop"};
  return names[spec.index()];
}

std::string kind_name(const EEGTransformSpec& spec) {
  static const char* names[] = {"channel_dropout", "noise_addition", "smoothing", "temporal_shift"};
  return names[spec.index()];
}

void apply_image_inplace(const ImageTransformSpec& spec, std::vector<double>& px, std::size_t C, std::size_t H,
                         std::size_t W, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::visit(overloaded{
                 [&](const GaussianBlur& s) { blur(px, C, H, W, s.sigma); },
                 [&](const GaussianNoise& s) {
                   if (s.sigma == 0.0) return;
                   std::normal_distribution<double> n(0.0, s.sigma);
                   for (double& v : px) v += n(rng);
                 },
                 [&](const LowResolution& s) { low_resolution(px, C, H, W, s.factor); },
                 [&](const Mosaic& s) { mosaic(px, C, H, W, s.cell); },
                 [&](const ColorJitter& s) { color_jitter(px, C, H * W, s, rng); },
                 [&](const Grayscale& s) { grayscale(px, C, H * W, s.strength); },
                 [&](const RandomCrop& s) { random_crop(px, C, H, W, s.fraction, rng); },
             },
             spec);
  clamp01(px);
}

void apply_eeg_inplace(const EEGTransformSpec& spec, std::vector<double>& x, std::size_t C, std::size_t T,
                       std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::visit(overloaded{
                 [&](const ChannelDropout& s) {
                   std::bernoulli_distribution drop(s.p);
                   for (std::size_t c = 0; c < C; ++c)
                     if (drop(rng)) std::fill_n(x.begin() + std::ptrdiff_t(c * T), T, 0.0);
                 },
                 [&](const NoiseAddition& s) {
                   if (s.relative_sigma == 0.0) return;
                   std::normal_distribution<double> n(0.0, 1.0);
                   for (std::size_t c = 0; c < C; ++c) {
                     double* row = &x[c * T];
                     double m = 0, ss = 0;
                     for (std::size_t t = 0; t < T; ++t) m += row[t];
                     m /= double(T);
                     for (std::size_t t = 0; t < T; ++t) ss += (row[t] - m) * (row[t] - m);
                     const double sigma = s.relative_sigma * std::sqrt(ss / double(T));
                     for (std::size_t t = 0; t < T; ++t) row[t] += sigma * n(rng);
                   }
                 },
                 [&](const Smoothing& s) {
                   if (s.window == 1) return;
                   const std::vector<double> w(s.window, 1.0 / double(s.window));
                   std::vector<double> out(x.size());
                   for (std::size_t c = 0; c < C; ++c) convolve_line(&x[c * T], &out[c * T], T, 1, w);
                   x.swap(out);
                 },
                 [&](const TemporalShift& s) {
                   if (s.max_shift == 0) return;
                   const auto m = static_cast<std::ptrdiff_t>(s.max_shift);
                   std::uniform_int_distribution<std::ptrdiff_t> d(-m, m);
                   const std::ptrdiff_t shift = d(rng);
                   if (shift == 0) return;
                   std::vector<double> out(x.size(), 0.0);
                   for (std::size_t c = 0; c < C; ++c)
                     for (std::size_t t = 0; t < T; ++t) {
                       const std::ptrdiff_t src = std::ptrdiff_t(t) - shift;
                       if (src >= 0 && src < std::ptrdiff_t(T)) out[c * T + t] = x[c * T + std::size_t(src)];
                     }
                   x.swap(out);
                 },
             },
             spec);
}

Tensor apply_image(const ImageTransformSpec& spec, const Tensor& image, std::uint64_t seed) {
  if (image.ndim() != 3) throw DimensionError("apply_image: expected [C, H, W], got " + to_string(image.shape()));
  validate(spec);
  auto px = to_doubles(image);
  for (double v : px)
    if (!(v >= 0.0 && v <= 1.0)) throw ContractError("apply_image: pixel values must lie in [0, 1]");
  apply_image_inplace(spec, px, image.dim(0), image.dim(1), image.dim(2), seed);
  return Tensor::from_values(px, image.shape(), image.dtype());
}

Tensor apply_eeg(const EEGTransformSpec& spec, const Tensor& trial, std::uint64_t seed) {
  if (trial.ndim() != 2) throw DimensionError("apply_eeg: expected [C, T], got " + to_string(trial.shape()));
  validate(spec, trial.dim(1));
  auto x = to_doubles(trial);
  apply_eeg_inplace(spec, x, trial.dim(0), trial.dim(1), seed);
  return Tensor::from_values(x, trial.shape(), trial.dtype());
}

}  // namespace brainalign::cpa
