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

#include "brainalign/train/gradcheck_suite.hpp"

#include <cmath>
#include <random>

#include "brainalign/align/loss.hpp"
#include "brainalign/align/projector.hpp"
#include "brainalign/encoders/eeg_encoder.hpp"
#include "brainalign/seed.hpp"
#include "brainalign/tensor/ops.hpp"

namespace brainalign::train {

namespace {

using Inputs = std::vector<Tensor>;
using Fn = std::function<Tensor(const Inputs&)>;

class Draw {
 public:
  explicit Draw(std::uint64_t seed) : rng_(seed) {}

  Tensor normal(Shape shape, double std = 1.0) {
    std::normal_distribution<double> dist(0.0, std);
    std::vector<double> v(numel(shape));
    for (double& x : v) x = dist(rng_);
    return Tensor::from_values(v, std::move(shape), DType::f64);
  }

  // Uniform in [lo, hi], for ops with a restricted domain or a kink at 0.
  Tensor uniform(Shape shape, double lo, double hi) {
    std::uniform_real_distribution<double> dist(lo, hi);
    std::vector<double> v(numel(shape));
    for (double& x : v) x = dist(rng_);
    return Tensor::from_values(v, std::move(shape), DType::f64);
  }

  // Magnitudes in [0.2, 1.5] with random sign, away from the ELU kink.
  Tensor off_zero(Shape shape) {
    std::uniform_real_distribution<double> mag(0.2, 1.5);
    std::bernoulli_distribution sign(0.5);
    std::vector<double> v(numel(shape));
    for (double& x : v) x = sign(rng_) ? mag(rng_) : -mag(rng_);
    return Tensor::from_values(v, std::move(shape), DType::f64);
  }

 private:
  std::mt19937_64 rng_;
};

// Contracts an op's output against fixed random weights so every output
// element contributes to the checked scalar.
Tensor probe(const Tensor& y, std::uint64_t seed) {
  Draw d(seed);
  Tensor w = d.normal(y.shape());
  return sum(mul(y, w));
}

void add_case(std::vector<GradcheckCase>& out, std::string name, bool primitive, const Fn& fn,
              Inputs inputs) {
  GradcheckCase c;
  c.name = std::move(name);
  c.primitive = primitive;
  c.result = gradcheck(fn, std::move(inputs));
  out.push_back(std::move(c));
}

void primitive_cases(std::vector<GradcheckCase>& out, std::uint64_t seed) {
  Draw d(derive_seed({seed, 1}));
  const std::uint64_t ps = derive_seed({seed, 2});
  auto unary = [&](std::string name, auto op, Tensor x) {
    add_case(out, std::move(name), true, [=](const Inputs& in) { return probe(op(in[0]), ps); }, {x});
  };
  auto binary = [&](std::string name, auto op, Tensor a, Tensor b) {
    add_case(out, std::move(name), true, [=](const Inputs& in) { return probe(op(in[0], in[1]), ps); },
             {a, b});
  };

  binary("matmul", [](const Tensor& a, const Tensor& b) { return matmul(a, b); }, d.normal({3, 4}),
         d.normal({4, 5}));
  unary("transpose", [](const Tensor& a) { return transpose(a); }, d.normal({3, 4}));
  binary("conv2d", [](const Tensor& x, const Tensor& w) { return conv2d(x, w); }, d.normal({2, 2, 5, 6}),
         d.normal({3, 2, 2, 3}));
  binary("conv2d_stride_pad",
         [](const Tensor& x, const Tensor& w) { return conv2d(x, w, {.stride_h = 2, .stride_w = 2, .pad_h = 1, .pad_w = 1}); },
         d.normal({2, 2, 5, 6}), d.normal({3, 2, 3, 3}));
  binary("add", [](const Tensor& a, const Tensor& b) { return add(a, b); }, d.normal({3, 4}), d.normal({3, 4}));
  binary("sub", [](const Tensor& a, const Tensor& b) { return sub(a, b); }, d.normal({3, 4}), d.normal({3, 4}));
  binary("mul", [](const Tensor& a, const Tensor& b) { return mul(a, b); }, d.normal({3, 4}), d.normal({3, 4}));
  unary("scale", [](const Tensor& a) { return scale(a, -1.7); }, d.normal({3, 4}));
  binary("mul_scalar", [](const Tensor& a, const Tensor& s) { return mul_scalar(a, s); }, d.normal({3, 4}),
         d.normal({}));
  binary("add_bias", [](const Tensor& x, const Tensor& b) { return add_bias(x, b, 1); }, d.normal({2, 3, 4}),
         d.normal({3}));
  unary("elu", [](const Tensor& a) { return elu(a); }, d.off_zero({3, 4}));
  unary("gelu", [](const Tensor& a) { return gelu(a); }, d.normal({3, 4}));
  unary("exp", [](const Tensor& a) { return exp(a); }, d.normal({3, 4}));
  unary("log", [](const Tensor& a) { return log(a); }, d.uniform({3, 4}, 0.5, 2.0));
  unary("square", [](const Tensor& a) { return square(a); }, d.normal({3, 4}));
  unary("sum", [](const Tensor& a) { return sum(a); }, d.normal({3, 4}));
  unary("mean", [](const Tensor& a) { return mean(a); }, d.normal({3, 4}));
  unary("sum_axis", [](const Tensor& a) { return sum(a, 1); }, d.normal({2, 3, 4}));
  unary("mean_axis", [](const Tensor& a) { return mean(a, 0); }, d.normal({2, 3, 4}));
  unary("avg_pool2d", [](const Tensor& a) { return avg_pool2d(a, 2, 2); }, d.normal({2, 2, 5, 4}));
  unary("dropout", [](const Tensor& a) { return dropout(a, 0.3, 17); }, d.normal({4, 5}));
  unary("l2_normalize", [](const Tensor& a) { return l2_normalize(a); }, d.normal({3, 4}));
  unary("logsumexp_rows", [](const Tensor& a) { return logsumexp_rows(a); }, d.normal({3, 4}));
  unary("diag", [](const Tensor& a) { return diag(a); }, d.normal({4, 4}));
  unary("reshape", [](const Tensor& a) { return reshape(a, {4, 3}); }, d.normal({3, 4}));
  unary("flatten", [](const Tensor& a) { return flatten(a); }, d.normal({2, 3, 4}));
  binary("stack",
         [](const Tensor& a, const Tensor& b) {
           std::vector<Tensor> parts{a, b, a};
           return stack(parts);
         },
         d.normal({3, 2}), d.normal({3, 2}));
  unary("gather_rows",
        [](const Tensor& a) {
          std::vector<std::size_t> rows{2, 0, 2};
          return gather_rows(a, rows);
        },
        d.normal({3, 4}));
  add_case(out, "linear", true,
           [=](const Inputs& in) { return probe(linear(in[0], in[1], in[2]), ps); },
           {d.normal({3, 4}), d.normal({4, 2}), d.normal({2})});
}

// Copies leaf inputs into a parameter list so fn rebuilds the model graph
// on the perturbed values.
void bind(encoders::NamedTensors& params, const Inputs& in, std::size_t& next) {
  for (auto& [name, t] : params) t = in[next++];
}

Inputs values_of(const encoders::NamedTensors& params) {
  Inputs v;
  for (const auto& [name, t] : params) v.push_back(t.detach());
  return v;
}

void composed_cases(std::vector<GradcheckCase>& out, std::uint64_t seed) {
  constexpr std::size_t B = 4, C = 3, T = 12, D_img = 7, Z = 5;
  Draw d(derive_seed({seed, 3}));
  const Tensor eeg = d.normal({B, C, T});
  const Tensor h_img = d.normal({B, D_img});

  auto loss_cases = [&](align::LossVariant variant) {
    const std::string name = "contrastive_loss_" + align::to_string(variant);
    add_case(out, name, false,
             [variant](const Inputs& in) {
               Tensor s = align::similarity_matrix(in[0], in[1], variant);
               return align::contrastive_loss(s, exp(scale(in[2], -1.0)));
             },
             {d.normal({B, Z}), d.normal({B, Z}), Tensor::scalar(std::log(0.5), DType::f64)});
  };
  for (auto v : {align::LossVariant::plain, align::LossVariant::sym, align::LossVariant::inv_asym,
                 align::LossVariant::asym})
    loss_cases(v);
  add_case(out, "contrastive_loss_strict", false,
           [](const Inputs& in) {
             return align::contrastive_loss(align::similarity_matrix(in[0], in[1], align::LossVariant::asym),
                                            0.3, true);
           },
           {d.normal({B, Z}), d.normal({B, Z})});

  auto pipeline_case = [&](encoders::EEGEncoderKind kind, align::ProjectorKind proj, align::LossVariant variant) {
    encoders::EEGEncoderConfig ec;
    ec.kind = kind;
    ec.temporal_kernel = 5;
    ec.features = 3;
    ec.pool = 2;
    ec.hidden = {6};
    ec.output_dim = 6;
    const std::uint64_t s = derive_seed({seed, 4});
    auto enc = std::make_shared<encoders::EEGEncoder>(ec, C, T, s, DType::f64);
    align::ProjectorConfig pc{.kind = proj, .output_dim = Z, .hidden = 4};
    auto p_img = std::make_shared<align::Projector>(pc, D_img, Z, derive_seed({s, 1}), DType::f64);
    auto p_eeg = std::make_shared<align::Projector>(pc, ec.output_dim, Z, derive_seed({s, 2}), DType::f64);

    Inputs inputs = values_of(enc->parameters());
    for (const auto& t : values_of(p_img->parameters())) inputs.push_back(t);
    for (const auto& t : values_of(p_eeg->parameters())) inputs.push_back(t);
    inputs.push_back(Tensor::scalar(std::log(0.07), DType::f64));

    const std::string name = "pipeline_" + encoders::to_string(kind) + "_" + align::to_string(proj) + "_" +
                             align::to_string(variant);
    add_case(out, name, false,
             [=](const Inputs& in) {
               std::size_t next = 0;
               bind(enc->parameters(), in, next);
               bind(p_img->parameters(), in, next);
               bind(p_eeg->parameters(), in, next);
               Tensor z_e = p_eeg->forward(enc->forward(eeg));
               Tensor z_i = p_img->forward(h_img);
               Tensor s = align::similarity_matrix(z_i, z_e, variant);
               return align::contrastive_loss(s, exp(scale(in[next], -1.0)));
             },
             inputs);
  };
  for (auto v : {align::LossVariant::plain, align::LossVariant::sym, align::LossVariant::inv_asym,
                 align::LossVariant::asym})
    pipeline_case(encoders::EEGEncoderKind::tsconv, align::ProjectorKind::linear, v);
  pipeline_case(encoders::EEGEncoderKind::mlp, align::ProjectorKind::mlp, align::LossVariant::asym);
}

}  // namespace

std::vector<GradcheckCase> run_gradcheck_suite(std::uint64_t seed) {
  std::vector<GradcheckCase> out;
  primitive_cases(out, seed);
  composed_cases(out, seed);
  return out;
}

}  // namespace brainalign::train
