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

#include "brainalign/dataio/preprocess.hpp"

#include <map>
#include <sstream>

#include <Eigen/Dense>

namespace brainalign::dataio {

namespace {

struct Layout {
  std::size_t n, c, t;
};

Layout layout_of(const Tensor& x, const char* op) {
  if (x.ndim() == 2) return {1, x.dim(0), x.dim(1)};
  if (x.ndim() == 3) return {x.dim(0), x.dim(1), x.dim(2)};
  throw DimensionError(std::string(op) + ": expected [C, T] or [N, C, T], got " + to_string(x.shape()));
}

Shape with_time(const Tensor& x, std::size_t t) {
  Shape s = x.shape();
  s.back() = t;
  return s;
}

}  // namespace

Tensor baseline_correct(const Tensor& trials, std::size_t pre_samples, std::size_t baseline_window) {
  const Layout l = layout_of(trials, "baseline_correct");
  if (baseline_window == 0 || baseline_window > pre_samples)
    throw ContractError("baseline_correct: window " + std::to_string(baseline_window) +
                        " must be in [1, pre-stimulus length " + std::to_string(pre_samples) + "]");
  if (pre_samples >= l.t)
    throw ContractError("baseline_correct: no post-stimulus samples in trials of length " + std::to_string(l.t));
  const std::size_t post = l.t - pre_samples;
  const auto x = trials.to_vector();
  std::vector<double> y(l.n * l.c * post);
  for (std::size_t r = 0; r < l.n * l.c; ++r) {
    const double* row = &x[r * l.t];
    double acc = 0;
    for (std::size_t s = pre_samples - baseline_window; s < pre_samples; ++s) acc += row[s];
    const double base = acc / static_cast<double>(baseline_window);
    for (std::size_t s = 0; s < post; ++s) y[r * post + s] = row[pre_samples + s] - base;
  }
  return Tensor::from_values(y, with_time(trials, post), trials.dtype());
}

Tensor downsample(const Tensor& trials, std::size_t factor) {
  const Layout l = layout_of(trials, "downsample");
  if (factor == 0) throw ContractError("downsample: factor must be >= 1");
  if (factor == 1) return trials.detach();
  const std::size_t out_t = l.t / factor;
  if (out_t == 0) throw ContractError("downsample: factor exceeds trial length");
  const auto x = trials.to_vector();
  std::vector<double> y(l.n * l.c * out_t);
  for (std::size_t r = 0; r < l.n * l.c; ++r)
    for (std::size_t b = 0; b < out_t; ++b) {
      double acc = 0;
      for (std::size_t s = 0; s < factor; ++s) acc += x[r * l.t + b * factor + s];
      y[r * out_t + b] = acc / static_cast<double>(factor);
    }
  return Tensor::from_values(y, with_time(trials, out_t), trials.dtype());
}

Whitening Whitening::fit(const Tensor& trials, double shrinkage) {
  const Layout l = layout_of(trials, "mvnn");
  if (!(shrinkage >= 0.0 && shrinkage <= 1.0)) throw ContractError("mvnn: shrinkage must be in [0, 1]");
  const std::size_t samples = l.n * l.t;
  if (samples <= l.c)
    throw ContractError("mvnn: covariance needs more than " + std::to_string(l.c) +
                        " samples, have " + std::to_string(samples));
  const auto x = trials.to_vector();
  Eigen::MatrixXd data(l.c, samples);
  for (std::size_t i = 0; i < l.n; ++i)
    for (std::size_t c = 0; c < l.c; ++c)
      for (std::size_t s = 0; s < l.t; ++s)
        data(Eigen::Index(c), Eigen::Index(i * l.t + s)) = x[(i * l.c + c) * l.t + s];
  Eigen::VectorXd mu = data.rowwise().mean();
  data.colwise() -= mu;
  Eigen::MatrixXd cov = data * data.transpose() / static_cast<double>(samples - 1);
  Eigen::MatrixXd shrunk = (1.0 - shrinkage) * cov;
  shrunk.diagonal() += shrinkage * cov.diagonal();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(shrunk);
  if (eig.info() != Eigen::Success)
    throw NumericError("mvnn: eigendecomposition failed; increase shrinkage");
  const double floor = 1e-12 * std::max(1.0, eig.eigenvalues().cwiseAbs().maxCoeff());
  if (eig.eigenvalues().minCoeff() <= floor) {
    std::ostringstream os;
    os << "mvnn: shrunk covariance is not positive definite (smallest eigenvalue "
       << eig.eigenvalues().minCoeff() << "); increase shrinkage";
    throw NumericError(os.str());
  }
  Eigen::MatrixXd w = eig.eigenvectors() * eig.eigenvalues().cwiseInverse().cwiseSqrt().asDiagonal() *
                      eig.eigenvectors().transpose();
  std::vector<double> flat(l.c * l.c);
  for (std::size_t i = 0; i < l.c; ++i)
    for (std::size_t j = 0; j < l.c; ++j) flat[i * l.c + j] = w(Eigen::Index(i), Eigen::Index(j));
  Whitening out;
  out.matrix_ = Tensor::from_values(flat, {l.c, l.c}, DType::f64);
  return out;
}

Tensor Whitening::apply(const Tensor& trials) const {
  const Layout l = layout_of(trials, "mvnn");
  const std::size_t c = matrix_.dim(0);
  if (l.c != c)
    throw DimensionError("mvnn: whitening matrix is " + to_string(matrix_.shape()) + ", trials have " +
                         std::to_string(l.c) + " channels");
  const auto w = matrix_.values<double>();
  const auto x = trials.to_vector();
  std::vector<double> y(x.size(), 0.0);
  for (std::size_t i = 0; i < l.n; ++i)
    for (std::size_t a = 0; a < c; ++a)
      for (std::size_t b = 0; b < c; ++b) {
        const double wab = w[a * c + b];
        const double* src = &x[(i * c + b) * l.t];
        double* dst = &y[(i * c + a) * l.t];
        for (std::size_t s = 0; s < l.t; ++s) dst[s] += wab * src[s];
      }
  return Tensor::from_values(y, trials.shape(), trials.dtype());
}

WhitenResult mvnn_whiten(const Tensor& trials, double shrinkage) {
  Whitening w = Whitening::fit(trials, shrinkage);
  return {w.apply(trials), w.matrix()};
}

Tensor average_repetitions(const Tensor& trials, std::span<const std::int64_t> stimulus_ids,
                           std::size_t repetitions, std::vector<std::int64_t>* out_ids) {
  if (trials.ndim() != 3) throw DimensionError("average_repetitions: expected [N, C, T], got " + to_string(trials.shape()));
  if (repetitions == 0) throw ContractError("average_repetitions: repetitions must be >= 1");
  const std::size_t n = trials.dim(0), row = trials.size() / n;
  if (stimulus_ids.size() != n)
    throw ContractError("average_repetitions: " + std::to_string(stimulus_ids.size()) +
                        " stimulus ids for " + std::to_string(n) + " trials");
  std::vector<std::int64_t> order;
  std::map<std::int64_t, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < n; ++i) {
    auto& g = groups[stimulus_ids[i]];
    if (g.empty()) order.push_back(stimulus_ids[i]);
    g.push_back(i);
  }
  std::vector<std::int64_t> ragged;
  for (std::int64_t id : order)
    if (groups[id].size() != repetitions) ragged.push_back(id);
  if (!ragged.empty()) {
    std::ostringstream os;
    os << "average_repetitions: expected " << repetitions << " trials per stimulus; ragged stimulus ids:";
    for (std::int64_t id : ragged) os << ' ' << id << " (" << groups[id].size() << ')';
    throw ContractError(os.str());
  }
  const auto x = trials.to_vector();
  std::vector<double> y(order.size() * row, 0.0);
  for (std::size_t g = 0; g < order.size(); ++g) {
    for (std::size_t i : groups[order[g]])
      for (std::size_t j = 0; j < row; ++j) y[g * row + j] += x[i * row + j];
    for (std::size_t j = 0; j < row; ++j) y[g * row + j] /= static_cast<double>(repetitions);
  }
  if (out_ids) *out_ids = order;
  Shape s = trials.shape();
  s[0] = order.size();
  return Tensor::from_values(y, s, trials.dtype());
}

PreprocessResult preprocess(const Tensor& raw, std::span<const std::int64_t> stimulus_ids,
                            const PreprocessConfig& config, const Whitening* fitted) {
  Tensor x = raw;
  if (config.pre_samples > 0) {
    x = baseline_correct(x, config.pre_samples,
                         config.baseline_window ? config.baseline_window : config.pre_samples);
  }
  x = downsample(x, config.downsample_factor);
  PreprocessResult out;
  x = average_repetitions(x, stimulus_ids, config.repetitions, &out.stimulus_ids);
  if (config.mvnn_enabled) {
    Whitening w = fitted ? *fitted : Whitening::fit(x, config.mvnn_shrinkage);
    x = w.apply(x);
    out.whitening = w.matrix();
  }
  out.trials = x;
  return out;
}

}  // namespace brainalign::dataio
