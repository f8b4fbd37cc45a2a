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

#include "brainalign/tensor/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace brainalign {

namespace {

using detail::Node;

void require_same_dtype(const Tensor& a, const Tensor& b, const char* op) {
  if (a.dtype() != b.dtype())
    throw ContractError(std::string(op) + ": dtype mismatch " + std::string(to_string(a.dtype())) +
                        " vs " + std::string(to_string(b.dtype())));
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape())
    throw DimensionError(std::string(op) + ": shape mismatch " + to_string(a.shape()) + " vs " +
                         to_string(b.shape()));
  require_same_dtype(a, b, op);
}

void require_rank(const Tensor& a, std::size_t rank, const char* op) {
  if (a.ndim() != rank)
    throw DimensionError(std::string(op) + ": expected rank " + std::to_string(rank) +
                         " tensor, got " + to_string(a.shape()));
}

// Attaches a backward closure if any input participates in autodiff.
void record(Tensor& out, std::string_view op, std::vector<Tensor> inputs,
            std::function<void(Node&)> backward) {
  bool needs = std::any_of(inputs.begin(), inputs.end(),
                           [](const Tensor& t) { return t.requires_grad(); });
  if (!needs) return;
  Node& n = *out.node();
  n.requires_grad = true;
  n.op = op;
  n.backward = std::move(backward);
  for (auto& t : inputs) n.inputs.push_back(t.node());
}

template <class T>
const std::vector<T>& vals(const Tensor& t) {
  return t.node()->values<T>();
}
template <class T>
std::vector<T>& out_vals(Tensor& t) {
  return t.node()->values<T>();
}

// Unary elementwise op with derivative expressed through (x, y).
template <class Fwd, class Deriv>
Tensor unary(const Tensor& a, std::string_view op, Fwd fwd, Deriv deriv) {
  Tensor out = Tensor::zeros(a.shape(), a.dtype());
  visit_dtype(a.dtype(), [&]<class T>() {
    const auto& x = vals<T>(a);
    auto& y = out_vals<T>(out);
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = static_cast<T>(fwd(double(x[i])));
    record(out, op, {a}, [deriv](Node& self) {
      Node& in = *self.inputs[0];
      if (!in.requires_grad) return;
      const auto& x = in.values<T>();
      const auto& y = self.values<T>();
      const auto& g = self.grad_values<T>();
      auto& gx = in.grad_values<T>();
      for (std::size_t i = 0; i < x.size(); ++i)
        gx[i] += g[i] * static_cast<T>(deriv(double(x[i]), double(y[i])));
    });
  });
  return out;
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_rank(a, 2, "matmul");
  require_rank(b, 2, "matmul");
  require_same_dtype(a, b, "matmul");
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  if (b.dim(0) != k)
    throw DimensionError("matmul: inner dimensions differ, " + to_string(a.shape()) + " x " +
                         to_string(b.shape()));
  Tensor out = Tensor::zeros({m, n}, a.dtype());
  visit_dtype(a.dtype(), [&]<class T>() {
    const auto& A = vals<T>(a);
    const auto& B = vals<T>(b);
    auto& C = out_vals<T>(out);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t p = 0; p < k; ++p) {
        const T av = A[i * k + p];
        for (std::size_t j = 0; j < n; ++j) C[i * n + j] += av * B[p * n + j];
      }
    record(out, "matmul", {a, b}, [m, k, n](Node& self) {
      Node& na = *self.inputs[0];
      Node& nb = *self.inputs[1];
      const auto& G = self.grad_values<T>();
      const auto& A = na.values<T>();
      const auto& B = nb.values<T>();
      if (na.requires_grad) {  // dA = G B^T
        auto& GA = na.grad_values<T>();
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t p = 0; p < k; ++p) {
            T acc = 0;
            for (std::size_t j = 0; j < n; ++j) acc += G[i * n + j] * B[p * n + j];
            GA[i * k + p] += acc;
          }
      }
      if (nb.requires_grad) {  // dB = A^T G
        auto& GB = nb.grad_values<T>();
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t p = 0; p < k; ++p) {
            const T av = A[i * k + p];
            for (std::size_t j = 0; j < n; ++j) GB[p * n + j] += av * G[i * n + j];
          }
      }
    });
  });
  return out;
}

Tensor transpose(const Tensor& a) {
  require_rank(a, 2, "transpose");
  const std::size_t m = a.dim(0), n = a.dim(1);
  Tensor out = Tensor::zeros({n, m}, a.dtype());
  visit_dtype(a.dtype(), [&]<class T>() {
    const auto& A = vals<T>(a);
    auto& B = out_vals<T>(out);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) B[j * m + i] = A[i * n + j];
    record(out, "transpose", {a}, [m, n](Node& self) {
      Node& in = *self.inputs[0];
      if (!in.requires_grad) return;
      const auto& G = self.grad_values<T>();
      auto& GA = in.grad_values<T>();
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) GA[i * n + j] += G[j * m + i];
    });
  });
  return out;
}

Tensor conv2d(const Tensor& x, const Tensor& w, const Conv2dOptions& opt) {
  require_rank(x, 4, "conv2d");
  require_rank(w, 4, "conv2d");
  require_same_dtype(x, w, "conv2d");
  if (opt.stride_h == 0 || opt.stride_w == 0) throw ContractError("conv2d: stride must be >= 1");
  const std::size_t B = x.dim(0), Cin = x.dim(1), H = x.dim(2), W = x.dim(3);
  const std::size_t Cout = w.dim(0), kh = w.dim(2), kw = w.dim(3);
  if (w.dim(1) != Cin)
    throw DimensionError("conv2d: input channels differ, x " + to_string(x.shape()) + " vs w " +
                         to_string(w.shape()));
  if (kh > H + 2 * opt.pad_h || kw > W + 2 * opt.pad_w)
    throw DimensionError("conv2d: kernel " + to_string(w.shape()) +
                         " larger than padded input " + to_string(x.shape()));
  const std::size_t Ho = (H + 2 * opt.pad_h - kh) / opt.stride_h + 1;
  const std::size_t Wo = (W + 2 * opt.pad_w - kw) / opt.stride_w + 1;
  const auto sh = static_cast<std::ptrdiff_t>(opt.stride_h), sw = static_cast<std::ptrdiff_t>(opt.stride_w);
  const auto ph = static_cast<std::ptrdiff_t>(opt.pad_h), pw = static_cast<std::ptrdiff_t>(opt.pad_w);
  const auto iH = static_cast<std::ptrdiff_t>(H), iW = static_cast<std::ptrdiff_t>(W);

  // Valid kernel columns per output column.
  std::vector<std::size_t> jlo(Wo), jhi(Wo);
  for (std::size_t ow = 0; ow < Wo; ++ow) {
    const std::ptrdiff_t base = static_cast<std::ptrdiff_t>(ow) * sw - pw;
    jlo[ow] = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, -base));
    jhi[ow] = static_cast<std::size_t>(
        std::clamp<std::ptrdiff_t>(iW - base, 0, static_cast<std::ptrdiff_t>(kw)));
    jhi[ow] = std::max(jhi[ow], jlo[ow]);
  }

  Tensor out = Tensor::zeros({B, Cout, Ho, Wo}, x.dtype());
  visit_dtype(x.dtype(), [&]<class T>() {
    const auto& X = vals<T>(x);
    const auto& Wt = vals<T>(w);
    auto& Y = out_vals<T>(out);
    for (std::size_t b = 0; b < B; ++b)
      for (std::size_t co = 0; co < Cout; ++co)
        for (std::size_t oh = 0; oh < Ho; ++oh)
          for (std::size_t ow = 0; ow < Wo; ++ow) {
            T acc = 0;
            for (std::size_t ci = 0; ci < Cin; ++ci)
              for (std::size_t i = 0; i < kh; ++i) {
                const std::ptrdiff_t ih = static_cast<std::ptrdiff_t>(oh) * sh + std::ptrdiff_t(i) - ph;
                if (ih < 0 || ih >= iH) continue;
                const T* xrow = &X[((b * Cin + ci) * H + std::size_t(ih)) * W];
                const T* wrow = &Wt[((co * Cin + ci) * kh + i) * kw];
                const std::ptrdiff_t base = static_cast<std::ptrdiff_t>(ow) * sw - pw;
                for (std::size_t j = jlo[ow]; j < jhi[ow]; ++j)
                  acc += xrow[std::size_t(base + std::ptrdiff_t(j))] * wrow[j];
              }
            Y[((b * Cout + co) * Ho + oh) * Wo + ow] = acc;
          }
    record(out, "conv2d", {x, w}, [=](Node& self) {
      Node& nx = *self.inputs[0];
      Node& nw = *self.inputs[1];
      const auto& G = self.grad_values<T>();
      const auto& X = nx.values<T>();
      const auto& Wt = nw.values<T>();
      T* GX = nx.requires_grad ? nx.grad_values<T>().data() : nullptr;
      T* GW = nw.requires_grad ? nw.grad_values<T>().data() : nullptr;
      for (std::size_t b = 0; b < B; ++b)
        for (std::size_t co = 0; co < Cout; ++co)
          for (std::size_t oh = 0; oh < Ho; ++oh)
            for (std::size_t ow = 0; ow < Wo; ++ow) {
              const T g = G[((b * Cout + co) * Ho + oh) * Wo + ow];
              for (std::size_t ci = 0; ci < Cin; ++ci)
                for (std::size_t i = 0; i < kh; ++i) {
                  const std::ptrdiff_t ih = static_cast<std::ptrdiff_t>(oh) * sh + std::ptrdiff_t(i) - ph;
                  if (ih < 0 || ih >= iH) continue;
                  const std::size_t xbase = ((b * Cin + ci) * H + std::size_t(ih)) * W;
                  const std::size_t wbase = ((co * Cin + ci) * kh + i) * kw;
                  const std::ptrdiff_t col = static_cast<std::ptrdiff_t>(ow) * sw - pw;
                  const std::size_t lo = jlo[ow], hi = jhi[ow];
                  const std::size_t x0 = std::size_t(std::ptrdiff_t(xbase) + col + std::ptrdiff_t(lo));
                  if (GX)
                    for (std::size_t j = lo; j < hi; ++j) GX[x0 + (j - lo)] += g * Wt[wbase + j];
                  if (GW)
                    for (std::size_t j = lo; j < hi; ++j) GW[wbase + j] += g * X[x0 + (j - lo)];
                }
            }
    });
  });
  return out;
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  Tensor out = Tensor::zeros(a.shape(), a.dtype());
  visit_dtype(a.dtype(), [&]<class T>() {
    const auto& A = vals<T>(a);
    const auto& B = vals<T>(b);
    auto& C = out_vals<T>(out);
    for (std::size_t i = 0; i < C.size(); ++i) C[i] = A[i] + B[i];
    record(out, "add", {a, b}, [](Node& self) {
      const auto& G = self.grad_values<T>();
      for (auto& in : self.inputs) {
        if (!in->requires_grad) continue;
        auto& GI = in->grad_values<T>();
        for (std::size_t i = 0; i < G.size(); ++i) GI[i] += G[i];
      }
    });
  });
  return out;
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  Tensor out = Tensor::zeros(a.shape(), a.dtype());
  visit_dtype(a.dtype(), [&]<class T>() {
    const auto& A = vals<T>(a);
    const auto& B = vals<T>(b);
    auto& C = out_vals<T>(out);
    for (std::size_t i = 0; i < C.size(); ++i) C[i] = A[i] - B[i];
    record(out, "sub", {a, b}, [](Node& self) {
      const auto& G = self.grad_values<T>();
      if (Node& na = *self.inputs[0]; na.requires_grad) {
        auto& GA = na.grad_values<T>();
        for (std::size_t i = 0; i < G.size(); ++i) GA[i] += G[i];
      }
      if (Node& nb = *self.inputs[1]; nb.requires_grad) {
        auto& GB = nb.grad_values<T>();
        for (std::size_t i = 0; i < G.size(); ++i) GB[i] -= G[i];
      }
    });
  });
  return out;
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  Tensor out = Tensor::zeros(a.shape(), a.dtype());
  visit_dtype(a.dtype(), [&]<class T>() {
    const auto& A = vals<T>(a);
    const auto& B = vals<T>(b);
    auto& C = out_vals<T>(out);
    for (std::size_t i = 0; i < C.size(); ++i) C[i] = A[i] * B[i];
    record(out, "mul", {a, b}, [](Node& self) {
      Node& na = *self.inputs[0];
      Node& nb = *self.inputs[1];
      const auto& G = self.grad_values<T>();
      const auto& A = na.values<T>();
      const auto& B = nb.values<T>();
      if (na.requires_grad) {
        auto& GA = na.grad_values<T>();
        for (std::size_t i = 0; i < G.size(); ++i) GA[i] += G[i] * B[i];
      }
      if (nb.requires_grad) {
        auto& GB = nb.grad_values<T>();
        for (std::size_t i = 0; i < G.size(); ++i) GB[i] += G[i] * A[i];
      }
    });
  });
  return out;
}

Tensor scale(const Tensor& a, double factor) {
  Tensor out = Tensor::zeros(a.shape(), a.dtype());
  visit_dtype(a.dtype(), [&]<class T>() {
    const T f = static_cast<T>(factor);
    const auto& A = vals<T>(a);
    auto& C = out_vals<T>(out);
    for (std::size_t i = 0; i < C.size(); ++i) C[i] = A[i] * f;
    record(out, "scale", {a}, [f](Node& self) {
      Node& in = *self.inputs[0];
      if (!in.requires_grad) return;
      const auto& G = self.grad_values<T>();
      auto& GA = in.grad_values<T>();
      for (std::size_t i = 0; i < G.size(); ++i) GA[i] += G[i] * f;
    });
  });
  return out;
}

Tensor mul_scalar(const Tensor& a, const Tensor& s) {
  require_same_dtype(a, s, "mul_scalar");
  if (s.size() != 1) throw DimensionError("mul_scalar: factor must have one element, got " + to_string(s.shape()));
  Tensor out = Tensor::zeros(a.shape(), a.dtype());
  visit_dtype(a.dtype(), [&]<class T>() {
    const auto& A = vals<T>(a);
    const T f = vals<T>(s)[0];
    auto& C = out_vals<T>(out);
    for (std::size_t i = 0; i < C.size(); ++i) C[i] = A[i] * f;
    record(out, "mul_scalar", {a, s}, [](Node& self) {
      Node& na = *self.inputs[0];
      Node& ns = *self.inputs[1];
      const auto& G = self.grad_values<T>();
      const auto& A = na.values<T>();
      const T f = ns.values<T>()[0];
      if (na.requires_grad) {
        auto& GA = na.grad_values<T>();
        for (std::size_t i = 0; i < G.size(); ++i) GA[i] += G[i] * f;
      }
      if (ns.requires_grad) {
        T acc = 0;
        for (std::size_t i = 0; i < G.size(); ++i) acc += G[i] * A[i];
        ns.grad_values<T>()[0] += acc;
      }
    });
  });
  return out;
}

Tensor add_bias(const Tensor& x, const Tensor& bias, std::size_t axis) {
  require_same_dtype(x, bias, "add_bias");
  if (axis >= x.ndim()) throw DimensionError("add_bias: axis out of range for " + to_string(x.shape()));
  if (bias.ndim() != 1 || bias.dim(0) != x.dim(axis))
    throw DimensionError("add_bias: bias " + to_string(bias.shape()) + " does not match axis " +
                         std::to_string(axis) + " of " + to_string(x.shape()));
  std::size_t outer = 1, inner = 1;
  for (std::size_t i = 0; i < axis; ++i) outer *= x.dim(i);
  for (std::size_t i = axis + 1; i < x.ndim(); ++i) inner *= x.dim(i);
  const std::size_t n = x.dim(axis);
  Tensor out = Tensor::zeros(x.shape(), x.dtype());
  visit_dtype(x.dtype(), [&]<class T>() {
    const auto& X = vals<T>(x);
    const auto& Bv = vals<T>(bias);
    auto& Y = out_vals<T>(out);
    for (std::size_t o = 0; o < outer; ++o)
      for (std::size_t c = 0; c < n; ++c)
        for (std::size_t i = 0; i < inner; ++i) {
          const std::size_t idx = (o * n + c) * inner + i;
          Y[idx] = X[idx] + Bv[c];
        }
    record(out, "add_bias", {x, bias}, [outer, n, inner](Node& self) {
      Node& nx = *self.inputs[0];
      Node& nb = *self.inputs[1];
      const auto& G = self.grad_values<T>();
      if (nx.requires_grad) {
        auto& GX = nx.grad_values<T>();
        for (std::size_t i = 0; i < G.size(); ++i) GX[i] += G[i];
      }
      if (nb.requires_grad) {
        auto& GB = nb.grad_values<T>();
        for (std::size_t o = 0; o < outer; ++o)
          for (std::size_t c = 0; c < n; ++c)
            for (std::size_t i = 0; i < inner; ++i) GB[c] += G[(o * n + c) * inner + i];
      }
    });
  });
  return out;
}

Tensor elu(const Tensor& a, double alpha) {
  return unary(
      a, "elu", [alpha](double x) { return x > 0 ? x : alpha * std::expm1(x); },
      [alpha](double x, double y) { return x > 0 ? 1.0 : y + alpha; });
}

Tensor gelu(const Tensor& a) {
  constexpr double inv_sqrt2 = 0.70710678118654752440;
  constexpr double inv_sqrt2pi = 0.39894228040143267794;
  return unary(
      a, "gelu", [](double x) { return 0.5 * x * std::erfc(-x * inv_sqrt2); },
      [](double x, double) {
        return 0.5 * std::erfc(-x * inv_sqrt2) + x * inv_sqrt2pi * std::exp(-0.5 * x * x);
      });
}

Tensor exp(const Tensor& a) {
  return unary(
      a, "exp", [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

Tensor log(const Tensor& a, std::optional<double> eps) {
  if (!eps) {
    bool bad = visit_dtype(a.dtype(), [&]<class T>() {
      const auto& x = vals<T>(a);
      return std::any_of(x.begin(), x.end(), [](T v) { return !(v > T(0)); });
    });
    if (bad) throw NumericError("log: non-positive input; configure an epsilon guard");
  }
  const double floor = eps.value_or(0.0);
  return unary(
      a, "log", [floor](double x) { return std::log(std::max(x, floor)); },
      [floor](double x, double) { return x > floor ? 1.0 / x : 0.0; });
}

Tensor square(const Tensor& a) {
  return unary(
      a, "square", [](double x) { return x * x; }, [](double x, double) { return 2.0 * x; });
}

Tensor sum(const Tensor& a) {
  Tensor out = Tensor::zeros({}, a.dtype());
  visit_dtype(a.dtype(), [&]<class T>() {
    T acc = 0;
    for (T v : vals<T>(a)) acc += v;
    out_vals<T>(out)[0] = acc;
    record(out, "sum", {a}, [](Node& self) {
      Node& in = *self.inputs[0];
      if (!in.requires_grad) return;
      const T g = self.grad_values<T>()[0];
      for (T& gi : in.grad_values<T>()) gi += g;
    });
  });
  return out;
}

Tensor mean(const Tensor& a) { return scale(sum(a), 1.0 / static_cast<double>(a.size())); }

Tensor sum(const Tensor& a, std::size_t axis) {
  if (axis >= a.ndim()) throw DimensionError("sum: axis out of range for " + to_string(a.shape()));
  std::size_t outer = 1, inner = 1;
  for (std::size_t i = 0; i < axis; ++i) outer *= a.dim(i);
  for (std::size_t i = axis + 1; i < a.ndim(); ++i) inner *= a.dim(i);
  const std::size_t n = a.dim(axis);
  Shape s = a.shape();
  s.erase(s.begin() + static_cast<std::ptrdiff_t>(axis));
  Tensor out = Tensor::zeros(s, a.dtype());
  visit_dtype(a.dtype(), [&]<class T>() {
    const auto& X = vals<T>(a);
    auto& Y = out_vals<T>(out);
    for (std::size_t o = 0; o < outer; ++o)
      for (std::size_t c = 0; c < n; ++c)
        for (std::size_t i = 0; i < inner; ++i) Y[o * inner + i] += X[(o * n + c) * inner + i];
    record(out, "sum_axis", {a}, [outer, n, inner](Node& self) {
      Node& in = *self.inputs[0];
      if (!in.requires_grad) return;
      const auto& G = self.grad_values<T>();
      auto& GX = in.grad_values<T>();
      for (std::size_t o = 0; o < outer; ++o)
        for (std::size_t c = 0; c < n; ++c)
          for (std::size_t i = 0; i < inner; ++i) GX[(o * n + c) * inner + i] += G[o * inner + i];
    });
  });
  return out;
}

// Running mean m += (x - m) / k, so a slice of identical values averages
// to exactly that value.
Tensor mean(const Tensor& a, std::size_t axis) {
  if (axis >= a.ndim()) throw DimensionError("mean: axis out of range for " + to_string(a.shape()));
  std::size_t outer = 1, inner = 1;
  for (std::size_t i = 0; i < axis; ++i) outer *= a.dim(i);
  for (std::size_t i = axis + 1; i < a.ndim(); ++i) inner *= a.dim(i);
  const std::size_t n = a.dim(axis);
  Shape s = a.shape();
  s.erase(s.begin() + static_cast<std::ptrdiff_t>(axis));
  Tensor out = Tensor::zeros(s, a.dtype());
  visit_dtype(a.dtype(), [&]<class T>() {
    const auto& X = vals<T>(a);
    auto& Y = out_vals<T>(out);
    for (std::size_t o = 0; o < outer; ++o)
      for (std::size_t c = 0; c < n; ++c) {
        const T k = static_cast<T>(c + 1);
        for (std::size_t i = 0; i < inner; ++i) {
          T& m = Y[o * inner + i];
          m += (X[(o * n + c) * inner + i] - m) / k;
        }
      }
    record(out, "mean_axis", {a}, [outer, n, inner](Node& self) {
      Node& in = *self.inputs[0];
      if (!in.requires_grad) return;
      const auto& G = self.grad_values<T>();
      auto& GX = in.grad_values<T>();
      const T inv = T(1) / static_cast<T>(n);
      for (std::size_t o = 0; o < outer; ++o)
        for (std::size_t c = 0; c < n; ++c)
          for (std::size_t i = 0; i < inner; ++i) GX[(o * n + c) * inner + i] += G[o * inner + i] * inv;
    });
  });
  return out;
}

Tensor avg_pool2d(const Tensor& x, std::size_t kh, std::size_t kw, std::size_t stride_h,
                  std::size_t stride_w) {
  require_rank(x, 4, "avg_pool2d");
  if (kh == 0 || kw == 0) throw ContractError("avg_pool2d: window must be >= 1");
  if (stride_h == 0) stride_h = kh;
  if (stride_w == 0) stride_w = kw;
  const std::size_t B = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
  if (kh > H || kw > W)
    throw DimensionError("avg_pool2d: window " + std::to_string(kh) + "x" + std::to_string(kw) +
                         " larger than input " + to_string(x.shape()));
  const std::size_t Ho = (H - kh) / stride_h + 1, Wo = (W - kw) / stride_w + 1;
  Tensor out = Tensor::zeros({B, C, Ho, Wo}, x.dtype());
  visit_dtype(x.dtype(), [&]<class T>() {
    const auto& X = vals<T>(x);
    auto& Y = out_vals<T>(out);
    const T inv = T(1) / static_cast<T>(kh * kw);
    for (std::size_t bc = 0; bc < B * C; ++bc)
      for (std::size_t oh = 0; oh < Ho; ++oh)
        for (std::size_t ow = 0; ow < Wo; ++ow) {
          T acc = 0;
          for (std::size_t i = 0; i < kh; ++i)
            for (std::size_t j = 0; j < kw; ++j)
              acc += X[(bc * H + oh * stride_h + i) * W + ow * stride_w + j];
          Y[(bc * Ho + oh) * Wo + ow] = acc * inv;
        }
    record(out, "avg_pool2d", {x}, [=](Node& self) {
      Node& in = *self.inputs[0];
      if (!in.requires_grad) return;
      const auto& G = self.grad_values<T>();
      auto& GX = in.grad_values<T>();
      for (std::size_t bc = 0; bc < B * C; ++bc)
        for (std::size_t oh = 0; oh < Ho; ++oh)
          for (std::size_t ow = 0; ow < Wo; ++ow) {
            const T g = G[(bc * Ho + oh) * Wo + ow] * inv;
            for (std::size_t i = 0; i < kh; ++i)
              for (std::size_t j = 0; j < kw; ++j)
                GX[(bc * H + oh * stride_h + i) * W + ow * stride_w + j] += g;
          }
    });
  });
  return out;
}

Tensor dropout(const Tensor& x, double p, std::uint64_t seed, bool training) {
  if (!(p >= 0.0 && p < 1.0)) throw ContractError("dropout: probability must be in [0, 1)");
  if (p == 0.0 || !training) return x;
  Tensor out = Tensor::zeros(x.shape(), x.dtype());
  visit_dtype(x.dtype(), [&]<class T>() {
    std::mt19937_64 rng(seed);
    std::bernoulli_distribution keep(1.0 - p);
    const T s = static_cast<T>(1.0 / (1.0 - p));
    std::vector<T> mask(x.size());
    for (T& m : mask) m = keep(rng) ? s : T(0);
    const auto& X = vals<T>(x);
    auto& Y = out_vals<T>(out);
    for (std::size_t i = 0; i < Y.size(); ++i) Y[i] = X[i] * mask[i];
    record(out, "dropout", {x}, [mask = std::move(mask)](Node& self) {
      Node& in = *self.inputs[0];
      if (!in.requires_grad) return;
      const auto& G = self.grad_values<T>();
      auto& GX = in.grad_values<T>();
      for (std::size_t i = 0; i < G.size(); ++i) GX[i] += G[i] * mask[i];
    });
  });
  return out;
}

Tensor l2_normalize(const Tensor& x, std::optional<double> eps) {
  if (x.ndim() == 0) throw DimensionError("l2_normalize: needs at least one axis");
  const std::size_t d = x.dim(x.ndim() - 1);
  const std::size_t rows = x.size() / d;
  Tensor out = Tensor::zeros(x.shape(), x.dtype());
  visit_dtype(x.dtype(), [&]<class T>() {
    const auto& X = vals<T>(x);
    auto& Y = out_vals<T>(out);
    std::vector<T> norms(rows);
    for (std::size_t r = 0; r < rows; ++r) {
      T ss = 0;
      for (std::size_t j = 0; j < d; ++j) ss += X[r * d + j] * X[r * d + j];
      T nrm = std::sqrt(ss);
      if (eps) {
        nrm = std::max(nrm, static_cast<T>(*eps));
      } else if (!(nrm > T(0))) {
        throw NumericError("l2_normalize: row " + std::to_string(r) +
                           " has zero norm; configure an epsilon guard");
      }
      norms[r] = nrm;
      for (std::size_t j = 0; j < d; ++j) Y[r * d + j] = X[r * d + j] / nrm;
    }
    const T floor = static_cast<T>(eps.value_or(0.0));
    record(out, "l2_normalize", {x}, [rows, d, floor, norms = std::move(norms)](Node& self) {
      Node& in = *self.inputs[0];
      if (!in.requires_grad) return;
      const auto& G = self.grad_values<T>();
      const auto& Y = self.values<T>();
      auto& GX = in.grad_values<T>();
      for (std::size_t r = 0; r < rows; ++r) {
        const T nrm = norms[r];
        // Inside the guard the map is x / eps, a plain scaling.
        const bool clamped = floor > T(0) && nrm <= floor;
        T dot = 0;
        if (!clamped)
          for (std::size_t j = 0; j < d; ++j) dot += G[r * d + j] * Y[r * d + j];
        for (std::size_t j = 0; j < d; ++j)
          GX[r * d + j] += (G[r * d + j] - dot * Y[r * d + j]) / nrm;
      }
    });
  });
  return out;
}

Tensor logsumexp_rows(const Tensor& x) {
  require_rank(x, 2, "logsumexp_rows");
  const std::size_t m = x.dim(0), n = x.dim(1);
  Tensor out = Tensor::zeros({m}, x.dtype());
  visit_dtype(x.dtype(), [&]<class T>() {
    const auto& X = vals<T>(x);
    auto& Y = out_vals<T>(out);
    for (std::size_t i = 0; i < m; ++i) {
      T mx = -std::numeric_limits<T>::infinity();
      for (std::size_t j = 0; j < n; ++j) mx = std::max(mx, X[i * n + j]);
      T acc = 0;
      for (std::size_t j = 0; j < n; ++j) acc += std::exp(X[i * n + j] - mx);
      Y[i] = mx + std::log(acc);
    }
    record(out, "logsumexp_rows", {x}, [m, n](Node& self) {
      Node& in = *self.inputs[0];
      if (!in.requires_grad) return;
      const auto& G = self.grad_values<T>();
      const auto& Y = self.values<T>();
      const auto& X = in.values<T>();
      auto& GX = in.grad_values<T>();
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) GX[i * n + j] += G[i] * std::exp(X[i * n + j] - Y[i]);
    });
  });
  return out;
}

Tensor diag(const Tensor& x) {
  require_rank(x, 2, "diag");
  const std::size_t n = x.dim(0);
  if (x.dim(1) != n) throw DimensionError("diag: matrix must be square, got " + to_string(x.shape()));
  Tensor out = Tensor::zeros({n}, x.dtype());
  visit_dtype(x.dtype(), [&]<class T>() {
    const auto& X = vals<T>(x);
    auto& Y = out_vals<T>(out);
    for (std::size_t i = 0; i < n; ++i) Y[i] = X[i * n + i];
    record(out, "diag", {x}, [n](Node& self) {
      Node& in = *self.inputs[0];
      if (!in.requires_grad) return;
      const auto& G = self.grad_values<T>();
      auto& GX = in.grad_values<T>();
      for (std::size_t i = 0; i < n; ++i) GX[i * n + i] += G[i];
    });
  });
  return out;
}

Tensor reshape(const Tensor& x, Shape shape) {
  if (numel(shape) != x.size())
    throw DimensionError("reshape: cannot view " + to_string(x.shape()) + " as " + to_string(shape));
  Tensor out = Tensor::zeros(std::move(shape), x.dtype());
  out.node()->data = x.node()->data;
  visit_dtype(x.dtype(), [&]<class T>() {
    record(out, "reshape", {x}, [](Node& self) {
      Node& in = *self.inputs[0];
      if (!in.requires_grad) return;
      const auto& G = self.grad_values<T>();
      auto& GX = in.grad_values<T>();
      for (std::size_t i = 0; i < G.size(); ++i) GX[i] += G[i];
    });
  });
  return out;
}

Tensor flatten(const Tensor& x, std::size_t start) {
  if (start >= x.ndim()) return x;
  Shape s(x.shape().begin(), x.shape().begin() + static_cast<std::ptrdiff_t>(start));
  std::size_t rest = 1;
  for (std::size_t i = start; i < x.ndim(); ++i) rest *= x.dim(i);
  s.push_back(rest);
  return reshape(x, std::move(s));
}

Tensor stack(std::span<const Tensor> parts) {
  if (parts.empty()) throw ContractError("stack: needs at least one tensor");
  for (const Tensor& p : parts) require_same_shape(parts[0], p, "stack");
  Shape s = parts[0].shape();
  s.insert(s.begin(), parts.size());
  const std::size_t each = parts[0].size();
  Tensor out = Tensor::zeros(s, parts[0].dtype());
  visit_dtype(out.dtype(), [&]<class T>() {
    auto& Y = out_vals<T>(out);
    for (std::size_t k = 0; k < parts.size(); ++k)
      std::copy(vals<T>(parts[k]).begin(), vals<T>(parts[k]).end(),
                Y.begin() + static_cast<std::ptrdiff_t>(k * each));
    record(out, "stack", std::vector<Tensor>(parts.begin(), parts.end()), [each](Node& self) {
      const auto& G = self.grad_values<T>();
      for (std::size_t k = 0; k < self.inputs.size(); ++k) {
        Node& in = *self.inputs[k];
        if (!in.requires_grad) continue;
        auto& GI = in.grad_values<T>();
        for (std::size_t i = 0; i < each; ++i) GI[i] += G[k * each + i];
      }
    });
  });
  return out;
}

Tensor gather_rows(const Tensor& x, std::span<const std::size_t> rows) {
  if (x.ndim() == 0) throw DimensionError("gather_rows: needs at least one axis");
  if (rows.empty()) throw ContractError("gather_rows: empty index list");
  const std::size_t n = x.dim(0), row = x.size() / n;
  for (std::size_t r : rows)
    if (r >= n) throw DimensionError("gather_rows: index " + std::to_string(r) + " out of range for " + to_string(x.shape()));
  Shape s = x.shape();
  s[0] = rows.size();
  Tensor out = Tensor::zeros(s, x.dtype());
  std::vector<std::size_t> idx(rows.begin(), rows.end());
  visit_dtype(x.dtype(), [&]<class T>() {
    const auto& X = vals<T>(x);
    auto& Y = out_vals<T>(out);
    for (std::size_t i = 0; i < idx.size(); ++i)
      std::copy_n(X.begin() + static_cast<std::ptrdiff_t>(idx[i] * row), row,
                  Y.begin() + static_cast<std::ptrdiff_t>(i * row));
    record(out, "gather_rows", {x}, [row, idx](Node& self) {
      Node& in = *self.inputs[0];
      if (!in.requires_grad) return;
      const auto& G = self.grad_values<T>();
      auto& GX = in.grad_values<T>();
      for (std::size_t i = 0; i < idx.size(); ++i)
        for (std::size_t j = 0; j < row; ++j) GX[idx[i] * row + j] += G[i * row + j];
    });
  });
  return out;
}

Tensor linear(const Tensor& x, const Tensor& w, const Tensor& b) {
  return add_bias(matmul(x, w), b, 1);
}

}  // namespace brainalign
