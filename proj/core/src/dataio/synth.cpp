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

#include "brainalign/dataio/synth.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "brainalign/seed.hpp"

namespace brainalign::dataio {

namespace {

using Matrix = std::vector<double>;  // row-major

Matrix gaussian(std::mt19937_64& rng, std::size_t n, double std) {
  std::normal_distribution<double> dist(0.0, std);
  Matrix m(n);
  for (double& v : m) v = dist(rng);
  return m;
}

// Stream per generator role so changing one size does not reshuffle others.
std::mt19937_64 stream(std::uint64_t seed, std::uint64_t role) {
  return std::mt19937_64(derive_seed({seed, role}));
}

enum Role : std::uint64_t {
  kConceptLatents = 1,
  kPairJitter,
  kEegMap,
  kEegNoise,
  kPixelBasis,
  kPixelNoise,
  kEmbedMap,
  kEmbedNoise,
  kViewNoise,
  kNoiseMixing,
  kTrialGain,
};

}  // namespace

SyntheticData synthesize_dataset(const SynthConfig& cfg) {
  if (cfg.train_concepts < 2 && cfg.test_concepts < 2)
    throw ContractError("synthesize: need at least 2 concepts");
  if (cfg.train_concepts == 0 || cfg.test_concepts == 0)
    throw ContractError("synthesize: both splits need concepts");
  if (cfg.images_per_concept == 0 || cfg.test_images_per_concept == 0 || cfg.latent_dim == 0 ||
      cfg.eeg_channels == 0 || cfg.eeg_samples == 0 || cfg.embed_dim == 0)
    throw ContractError("synthesize: sizes must be positive");
  if (!cfg.pixels && cfg.views == 0) throw ContractError("synthesize: emit pixels or at least one view");
  if (cfg.identity_maps && (cfg.eeg_channels != cfg.latent_dim || cfg.embed_dim != cfg.latent_dim))
    throw ContractError("synthesize: identity maps need eeg_channels == embed_dim == latent_dim");
  if (cfg.eeg_noise < 0 || cfg.pixel_noise < 0 || cfg.embed_noise < 0 || cfg.view_noise < 0 ||
      cfg.pair_jitter < 0 || cfg.trial_gain_spread < 0)
    throw ContractError("synthesize: noise levels must be >= 0");

  const std::size_t L = cfg.latent_dim, C = cfg.eeg_channels, T = cfg.eeg_samples, D = cfg.embed_dim;
  const std::size_t n_concepts = cfg.train_concepts + cfg.test_concepts;

  auto rng_concept = stream(cfg.seed, kConceptLatents);
  Matrix concept_latent = gaussian(rng_concept, n_concepts * L, 1.0);

  std::vector<std::int64_t> concept_ids;
  for (std::size_t c = 0; c < n_concepts; ++c) {
    const std::size_t reps = c < cfg.train_concepts ? cfg.images_per_concept : cfg.test_images_per_concept;
    for (std::size_t r = 0; r < reps; ++r) concept_ids.push_back(static_cast<std::int64_t>(c));
  }
  const std::size_t N = concept_ids.size();

  auto rng_jitter = stream(cfg.seed, kPairJitter);
  Matrix z(N * L);
  {
    std::normal_distribution<double> dist(0.0, cfg.pair_jitter);
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t l = 0; l < L; ++l)
        z[i * L + l] = concept_latent[std::size_t(concept_ids[i]) * L + l] +
                       (cfg.pair_jitter > 0 ? dist(rng_jitter) : 0.0);
  }

  // EEG: x[c, t] = sum_l z_l * a_l[c] * w_l(t) + noise_scale * (M eps)[c, t]
  Matrix eeg(N * C * T, 0.0);
  if (cfg.identity_maps) {
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t c = 0; c < C; ++c)
        for (std::size_t t = 0; t < T; ++t) eeg[(i * C + c) * T + t] = z[i * L + c];
  } else {
    auto rng_map = stream(cfg.seed, kEegMap);
    Matrix spatial = gaussian(rng_map, L * C, 1.0 / std::sqrt(double(L)));
    Matrix wave(L * T);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (std::size_t l = 0; l < L; ++l) {
      const double latency = (0.2 + 0.6 * u(rng_map)) * double(T);
      const double width = (0.08 + 0.12 * u(rng_map)) * double(T);
      const double freq = 1.0 + 3.0 * u(rng_map);
      const double phase = 2.0 * std::numbers::pi * u(rng_map);
      for (std::size_t t = 0; t < T; ++t) {
        const double d = (double(t) - latency) / width;
        wave[l * T + t] = 2.0 * std::exp(-0.5 * d * d) *
                          std::sin(2.0 * std::numbers::pi * freq * double(t) / double(T) + phase);
      }
    }
    auto rng_gain = stream(cfg.seed, kTrialGain);
    std::normal_distribution<double> gain_dist(0.0, 1.0);
    for (std::size_t i = 0; i < N; ++i) {
      const double gain = cfg.trial_gain_spread > 0 ? std::exp(cfg.trial_gain_spread * gain_dist(rng_gain)) : 1.0;
      for (std::size_t l = 0; l < L; ++l) {
        const double zl = gain * z[i * L + l];
        for (std::size_t c = 0; c < C; ++c) {
          const double a = zl * spatial[l * C + c];
          double* dst = &eeg[(i * C + c) * T];
          for (std::size_t t = 0; t < T; ++t) dst[t] += a * wave[l * T + t];
        }
      }
    }
  }
  if (cfg.eeg_noise > 0) {
    auto rng_mix = stream(cfg.seed, kNoiseMixing);
    Matrix mixing = gaussian(rng_mix, C * C, 1.0);
    for (std::size_t a = 0; a < C; ++a) {  // unit-norm rows: unit marginal variance
      double ss = 0;
      for (std::size_t b = 0; b < C; ++b) ss += mixing[a * C + b] * mixing[a * C + b];
      for (std::size_t b = 0; b < C; ++b) mixing[a * C + b] /= std::sqrt(ss);
    }
    auto rng_noise = stream(cfg.seed, kEegNoise);
    std::normal_distribution<double> dist(0.0, 1.0);
    Matrix eps(C * T);
    for (std::size_t i = 0; i < N; ++i) {
      for (double& e : eps) e = dist(rng_noise);
      for (std::size_t a = 0; a < C; ++a)
        for (std::size_t b = 0; b < C; ++b)
          for (std::size_t t = 0; t < T; ++t)
            eeg[(i * C + a) * T + t] += cfg.eeg_noise * mixing[a * C + b] * eps[b * T + t];
    }
  }

  SyntheticData out;
  PairedDataset& ds = out.dataset;
  ds.eeg = Tensor::from_values(eeg, {N, C, T}, cfg.dtype);
  ds.concept_ids = concept_ids;
  for (std::size_t c = 0; c < n_concepts; ++c)
    (c < cfg.train_concepts ? ds.train_concepts : ds.test_concepts).push_back(static_cast<std::int64_t>(c));

  if (cfg.pixels) {
    // Each latent dimension drives a few low-frequency cosine gratings per
    // colour channel; the sum passes through a logistic squash into (0, 1).
    const std::size_t CI = cfg.image_channels, S = cfg.image_size;
    auto rng_basis = stream(cfg.seed, kPixelBasis);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> amp(0.0, 1.0);
    Matrix basis(L * CI * S * S, 0.0);
    for (std::size_t l = 0; l < L; ++l)
      for (std::size_t ch = 0; ch < CI; ++ch)
        for (int g = 0; g < 3; ++g) {
          const double fx = std::floor(u(rng_basis) * 3.0), fy = std::floor(u(rng_basis) * 3.0);
          const double ph = 2.0 * std::numbers::pi * u(rng_basis), a = amp(rng_basis);
          for (std::size_t h = 0; h < S; ++h)
            for (std::size_t w = 0; w < S; ++w)
              basis[((l * CI + ch) * S + h) * S + w] +=
                  a * std::cos(2.0 * std::numbers::pi * (fx * double(w) + fy * double(h)) / double(S) + ph);
        }
    const double gain = 1.0 / std::sqrt(3.0 * double(L));
    auto rng_pix = stream(cfg.seed, kPixelNoise);
    std::normal_distribution<double> pn(0.0, 1.0);
    const std::size_t P = CI * S * S;
    Matrix pix(N * P, 0.0);
    for (std::size_t i = 0; i < N; ++i) {
      for (std::size_t l = 0; l < L; ++l) {
        const double zl = z[i * L + l] * gain;
        for (std::size_t p = 0; p < P; ++p) pix[i * P + p] += zl * basis[l * P + p];
      }
      for (std::size_t p = 0; p < P; ++p) {
        double v = 1.0 / (1.0 + std::exp(-pix[i * P + p]));
        if (cfg.pixel_noise > 0) v += cfg.pixel_noise * pn(rng_pix);
        pix[i * P + p] = std::clamp(v, 0.0, 1.0);
      }
    }
    ds.images = Tensor::from_values(pix, {N, CI, S, S}, cfg.dtype);
  }

  if (cfg.views > 0) {
    Matrix embed(N * D, 0.0);
    if (cfg.identity_maps) {
      embed = z;
    } else {
      auto rng_emb = stream(cfg.seed, kEmbedMap);
      Matrix map = gaussian(rng_emb, D * L, 1.0 / std::sqrt(double(L)));
      for (std::size_t i = 0; i < N; ++i)
        for (std::size_t d = 0; d < D; ++d) {
          double acc = 0;
          for (std::size_t l = 0; l < L; ++l) acc += map[d * L + l] * z[i * L + l];
          embed[i * D + d] = acc;
        }
    }
    if (cfg.embed_noise > 0) {
      auto rng = stream(cfg.seed, kEmbedNoise);
      std::normal_distribution<double> dist(0.0, cfg.embed_noise);
      for (double& v : embed) v += dist(rng);
    }
    for (std::size_t k = 0; k < cfg.views; ++k) {
      Matrix view = embed;
      if (cfg.view_noise > 0) {
        std::mt19937_64 rng(derive_seed({cfg.seed, kViewNoise, k}));
        std::normal_distribution<double> dist(0.0, cfg.view_noise);
        for (double& v : view) v += dist(rng);
      }
      ds.view_embeddings.push_back(Tensor::from_values(view, {N, D}, cfg.dtype));
    }
  }

  out.latents = Tensor::from_values(z, {N, L}, DType::f64);
  out.concept_latents = Tensor::from_values(concept_latent, {n_concepts, L}, DType::f64);
  ds.validate();
  return out;
}

RawTrials simulate_raw_trials(const Tensor& clean, const RawTrialConfig& cfg) {
  if (clean.ndim() != 3) throw DimensionError("simulate_raw_trials: expected [N, C, T]");
  if (cfg.repetitions == 0 || cfg.hold == 0) throw ContractError("simulate_raw_trials: repetitions and hold must be >= 1");
  const std::size_t N = clean.dim(0), C = clean.dim(1), T = clean.dim(2);
  const std::size_t len = cfg.pre_samples + T * cfg.hold;
  const auto x = clean.to_vector();
  std::mt19937_64 rng(derive_seed({cfg.seed, 0x7261770000000000ULL}));
  std::normal_distribution<double> offset(0.0, cfg.offset_std), noise(0.0, cfg.noise);
  RawTrials out;
  std::vector<double> raw(N * cfg.repetitions * C * len);
  std::size_t trial = 0;
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t r = 0; r < cfg.repetitions; ++r, ++trial) {
      out.stimulus_ids.push_back(static_cast<std::int64_t>(i));
      for (std::size_t c = 0; c < C; ++c) {
        const double dc = cfg.offset_std > 0 ? offset(rng) : 0.0;
        double* dst = &raw[(trial * C + c) * len];
        for (std::size_t s = 0; s < len; ++s) {
          const double signal = s < cfg.pre_samples ? 0.0 : x[(i * C + c) * T + (s - cfg.pre_samples) / cfg.hold];
          dst[s] = signal + dc + (cfg.noise > 0 ? noise(rng) : 0.0);
        }
      }
    }
  out.trials = Tensor::from_values(raw, {N * cfg.repetitions, C, len}, clean.dtype());
  return out;
}

}  // namespace brainalign::dataio
