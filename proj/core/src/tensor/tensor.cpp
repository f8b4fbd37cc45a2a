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

#include "brainalign/tensor/tensor.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_set>

namespace brainalign {

std::size_t numel(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string to_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "x" : "") << shape[i];
  os << ']';
  return os.str();
}

std::string_view to_string(DType dtype) { return dtype == DType::f32 ? "f32" : "f64"; }

DType parse_dtype(std::string_view name) {
  if (name == "f32") return DType::f32;
  if (name == "f64") return DType::f64;
  throw ContractError("unknown dtype '" + std::string(name) + "' (expected f32 or f64)");
}

std::size_t dtype_size(DType dtype) { return dtype == DType::f32 ? 4 : 8; }

namespace detail {
Buffer make_buffer(DType dtype, std::size_t n) {
  if (dtype == DType::f32) return std::vector<float>(n, 0.0f);
  return std::vector<double>(n, 0.0);
}
}  // namespace detail

namespace {
std::shared_ptr<detail::Node> make_leaf(Shape shape, DType dtype) {
  for (std::size_t d : shape)
    if (d == 0) throw DimensionError("tensor dimensions must be positive, got " + to_string(shape));
  auto node = std::make_shared<detail::Node>();
  node->data = detail::make_buffer(dtype, numel(shape));
  node->shape = std::move(shape);
  node->dtype = dtype;
  return node;
}
}  // namespace

Tensor Tensor::zeros(Shape shape, DType dtype) { return Tensor(make_leaf(std::move(shape), dtype)); }

Tensor Tensor::full(Shape shape, double value, DType dtype) {
  Tensor t = zeros(std::move(shape), dtype);
  visit_dtype(dtype, [&]<class T>() {
    auto& v = t.node_->values<T>();
    std::fill(v.begin(), v.end(), static_cast<T>(value));
  });
  return t;
}

Tensor Tensor::from_values(std::span<const double> values, Shape shape, DType dtype) {
  if (values.size() != numel(shape))
    throw DimensionError("value count " + std::to_string(values.size()) +
                         " does not match shape " + to_string(shape));
  Tensor t = zeros(std::move(shape), dtype);
  visit_dtype(dtype, [&]<class T>() {
    auto& v = t.node_->values<T>();
    std::transform(values.begin(), values.end(), v.begin(),
                   [](double x) { return static_cast<T>(x); });
  });
  return t;
}

Tensor Tensor::from_values(std::initializer_list<double> values, Shape shape, DType dtype) {
  return from_values(std::span<const double>(values.begin(), values.size()), std::move(shape),
                     dtype);
}

Tensor Tensor::scalar(double value, DType dtype) { return full({}, value, dtype); }

Tensor Tensor::eye(std::size_t n, DType dtype) {
  Tensor t = zeros({n, n}, dtype);
  visit_dtype(dtype, [&]<class T>() {
    auto& v = t.node_->values<T>();
    for (std::size_t i = 0; i < n; ++i) v[i * n + i] = T(1);
  });
  return t;
}

void Tensor::require_defined() const {
  if (!node_) throw ContractError("use of an undefined tensor");
}

void Tensor::check_leaf(const char* what) const {
  if (!node_->is_leaf())
    throw ContractError(std::string(what) + " requires a leaf tensor, got output of '" +
                        std::string(node_->op) + "'");
}

void Tensor::throw_dtype_mismatch(DType requested) const {
  throw ContractError("tensor has dtype " + std::string(to_string(dtype())) + ", accessed as " +
                      std::string(to_string(requested)));
}

const Shape& Tensor::shape() const {
  require_defined();
  return node_->shape;
}

std::size_t Tensor::dim(std::size_t axis) const {
  if (axis >= ndim())
    throw DimensionError("axis " + std::to_string(axis) + " out of range for shape " +
                         to_string(shape()));
  return node_->shape[axis];
}

DType Tensor::dtype() const {
  require_defined();
  return node_->dtype;
}

bool Tensor::requires_grad() const {
  require_defined();
  return node_->requires_grad;
}

Tensor& Tensor::set_requires_grad(bool on) {
  require_defined();
  check_leaf("set_requires_grad");
  node_->requires_grad = on;
  return *this;
}

std::vector<double> Tensor::to_vector() const {
  require_defined();
  return visit_dtype(dtype(), [&]<class T>() {
    const auto& v = node_->values<T>();
    return std::vector<double>(v.begin(), v.end());
  });
}

double Tensor::item() const {
  if (size() != 1) throw DimensionError("item() needs a single-element tensor, got " + to_string(shape()));
  return to_vector()[0];
}

double Tensor::at(std::initializer_list<std::size_t> index) const {
  const Shape& s = shape();
  if (index.size() != s.size())
    throw DimensionError("index rank " + std::to_string(index.size()) + " != tensor rank " +
                         std::to_string(s.size()));
  std::size_t flat = 0, axis = 0;
  for (std::size_t i : index) {
    if (i >= s[axis]) throw DimensionError("index out of range for shape " + to_string(s));
    flat = flat * s[axis++] + i;
  }
  return visit_dtype(dtype(), [&]<class T>() { return double(node_->values<T>()[flat]); });
}

bool Tensor::has_grad() const {
  require_defined();
  return node_->grad.has_value();
}

Tensor Tensor::grad() const {
  require_defined();
  Tensor g = zeros(node_->shape, node_->dtype);
  if (node_->grad) g.node_->data = *node_->grad;
  return g;
}

void Tensor::zero_grad() {
  require_defined();
  node_->grad.reset();
}

Tensor Tensor::detach() const {
  require_defined();
  auto node = std::make_shared<detail::Node>();
  node->shape = node_->shape;
  node->dtype = node_->dtype;
  node->data = node_->data;
  return Tensor(std::move(node));
}

Tensor Tensor::to(DType target) const {
  if (target == dtype()) return detach();
  return from_values(to_vector(), shape(), target);
}

std::vector<std::shared_ptr<detail::Node>> topological_order(const Tensor& root) {
  std::vector<std::shared_ptr<detail::Node>> order;
  std::unordered_set<const detail::Node*> seen;
  // Iterative post-order DFS; graphs from long training steps can be deep.
  std::vector<std::pair<std::shared_ptr<detail::Node>, std::size_t>> stack;
  stack.emplace_back(root.node(), 0);
  seen.insert(root.node().get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->inputs.size()) {
      auto child = node->inputs[next++];
      if (seen.insert(child.get()).second) stack.emplace_back(std::move(child), 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
  return order;
}

void Tensor::backward() const {
  require_defined();
  if (size() != 1 || ndim() > 1)
    throw ContractError("backward() needs a scalar loss, got shape " + to_string(shape()));
  if (!node_->requires_grad) throw ContractError("backward() on a tensor that does not require grad");

  auto order = topological_order(*this);
  for (auto& n : order)
    if (!n->is_leaf()) n->grad.reset();
  visit_dtype(dtype(), [&]<class T>() { node_->grad_values<T>()[0] = T(1); });
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    detail::Node& n = **it;
    if (!n.is_leaf() && n.requires_grad && n.grad && n.backward) n.backward(n);
  }
}

}  // namespace brainalign
