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

#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace brainalign::testing {

Eigen::MatrixXd to_eigen(const Tensor& t) {
  if (t.ndim() != 2) throw DimensionError("to_eigen: expected a 2-D tensor, got " + to_string(t.shape()));
  const auto v = t.to_vector();
  Eigen::MatrixXd m(t.dim(0), t.dim(1));
  for (std::size_t i = 0; i < t.dim(0); ++i)
    for (std::size_t j = 0; j < t.dim(1); ++j) m(i, j) = v[i * t.dim(1) + j];
  return m;
}

Eigen::MatrixXd flatten_rows(const Tensor& t) {
  const std::size_t n = t.dim(0), d = t.size() / n;
  const auto v = t.to_vector();
  Eigen::MatrixXd m(n, d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) m(i, j) = v[i * d + j];
  return m;
}

namespace {
double lse(const std::vector<double>& x) {
  double hi = x[0];
  for (double v : x) hi = std::max(hi, v);
  double s = 0;
  for (double v : x) s += std::exp(v - hi);
  return hi + std::log(s);
}
}  // namespace

double reference_infonce(const Eigen::MatrixXd& s, double tau) {
  const auto n = s.rows();
  double total = 0;
  for (Eigen::Index j = 0; j < n; ++j) {
    std::vector<double> row(n), col(n);
    for (Eigen::Index k = 0; k < n; ++k) {
      row[k] = s(j, k) / tau;
      col[k] = s(k, j) / tau;
    }
    total += (lse(row) - s(j, j) / tau) + (lse(col) - s(j, j) / tau);
  }
  return total / (2.0 * double(n));
}

std::size_t brute_force_rank(std::span<const double> row, std::span<const std::size_t> candidates,
                             std::size_t true_index) {
  std::vector<std::size_t> order(candidates.begin(), candidates.end());
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (row[a] != row[b]) return row[a] > row[b];
    return a < b;
  });
  return std::size_t(std::find(order.begin(), order.end(), true_index) - order.begin()) + 1;
}

Eigen::MatrixXd RidgeMap::predict(const Eigen::MatrixXd& x) const {
  return ((x.rowwise() - x_mean) * w).rowwise() + y_mean;
}

RidgeMap fit_ridge(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, double lambda) {
  RidgeMap r;
  r.x_mean = x.colwise().mean();
  r.y_mean = y.colwise().mean();
  const Eigen::MatrixXd xc = x.rowwise() - r.x_mean;
  const Eigen::MatrixXd yc = y.rowwise() - r.y_mean;
  Eigen::MatrixXd a = xc.transpose() * xc;
  a.diagonal().array() += lambda;
  r.w = a.ldlt().solve(xc.transpose() * yc);
  return r;
}

double cosine_top1(const Eigen::MatrixXd& queries, const Eigen::MatrixXd& candidates,
                   std::span<const std::size_t> true_index) {
  const Eigen::MatrixXd c = candidates.rowwise().normalized();
  std::size_t hits = 0;
  for (Eigen::Index i = 0; i < queries.rows(); ++i) {
    const Eigen::VectorXd scores = c * queries.row(i).transpose();
    Eigen::Index best = 0;
    for (Eigen::Index j = 1; j < scores.size(); ++j)
      if (scores(j) > scores(best)) best = j;
    hits += std::size_t(best) == true_index[std::size_t(i)];
  }
  return double(hits) / double(queries.rows());
}

Eigen::MatrixXd channel_covariance(const Tensor& trials) {
  const std::size_t n = trials.dim(0), c = trials.dim(1), t = trials.dim(2);
  const auto v = trials.to_vector();
  Eigen::MatrixXd samples(n * t, c);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t ch = 0; ch < c; ++ch)
      for (std::size_t k = 0; k < t; ++k) samples(i * t + k, ch) = v[(i * c + ch) * t + k];
  const Eigen::MatrixXd centred = samples.rowwise() - samples.colwise().mean();
  return centred.transpose() * centred / double(n * t - 1);
}

bool within_binomial(double observed, double p, std::size_t n, double sigmas) {
  const double sd = std::sqrt(p * (1 - p) / double(n));
  return std::abs(observed - p) <= sigmas * sd;
}

}  // namespace brainalign::testing
