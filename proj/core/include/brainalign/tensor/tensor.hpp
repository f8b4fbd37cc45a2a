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

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "brainalign/error.hpp"

namespace brainalign {

enum class DType : std::uint8_t { f32 = 1, f64 = 2 };

using Shape = std::vector<std::size_t>;

std::size_t numel(const Shape& shape);
std::string to_string(const Shape& shape);
std::string_view to_string(DType dtype);
DType parse_dtype(std::string_view name);
std::size_t dtype_size(DType dtype);

// Calls f.template operator()<T>() with T = float or double.
template <class F>
decltype(auto) visit_dtype(DType dtype, F&& f) {
  if (dtype == DType::f32) return std::forward<F>(f).template operator()<float>();
  return std::forward<F>(f).template operator()<double>();
}

template <class T>
constexpr DType dtype_of() {
  static_assert(std::is_same_v<T, float> || std::is_same_v<T, double>);
  return std::is_same_v<T, float> ? DType::f32 : DType::f64;
}

namespace detail {

using Buffer = std::variant<std::vector<float>, std::vector<double>>;

Buffer make_buffer(DType dtype, std::size_t n);

// One value in the computation graph. Non-leaf nodes hold their inputs and a
// closure that pushes this node's grad into the inputs' grads.
struct Node {
  Shape shape;
  DType dtype = DType::f32;
  Buffer data;
  std::optional<Buffer> grad;
  bool requires_grad = false;
  std::string_view op = "leaf";
  std::vector<std::shared_ptr<Node>> inputs;
  std::function<void(Node&)> backward;

  bool is_leaf() const { return inputs.empty(); }

  template <class T>
  std::vector<T>& values() {
    return std::get<std::vector<T>>(data);
  }
  template <class T>
  const std::vector<T>& values() const {
    return std::get<std::vector<T>>(data);
  }
  // Zero-initialized on first access.
  template <class T>
  std::vector<T>& grad_values() {
    if (!grad) grad = make_buffer(dtype, numel(shape));
    return std::get<std::vector<T>>(*grad);
  }
};

}  // namespace detail

// Dense row-major array. Copies share the underlying node (handle semantics);
// use clone() for an independent copy.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape, DType dtype = DType::f32);
  static Tensor full(Shape shape, double value, DType dtype = DType::f32);
  static Tensor from_values(std::span<const double> values, Shape shape, DType dtype = DType::f32);
  static Tensor from_values(std::initializer_list<double> values, Shape shape,
                            DType dtype = DType::f32);
  static Tensor scalar(double value, DType dtype = DType::f32);
  static Tensor eye(std::size_t n, DType dtype = DType::f32);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const;
  std::size_t dim(std::size_t axis) const;
  std::size_t ndim() const { return shape().size(); }
  std::size_t size() const { return numel(shape()); }
  DType dtype() const;

  bool requires_grad() const;
  // Marks a leaf as trainable. Throws on non-leaf tensors.
  Tensor& set_requires_grad(bool on = true);

  template <class T>
  std::span<const T> values() const {
    check_type<T>();
    return node_->values<T>();
  }
  // Direct write access; only legal on leaves (optimizer updates, loaders).
  template <class T>
  std::span<T> mutable_values() {
    check_type<T>();
    check_leaf("mutable_values");
    return node_->values<T>();
  }
  std::vector<double> to_vector() const;
  double item() const;
  double at(std::initializer_list<std::size_t> index) const;

  bool has_grad() const;
  // Gradient as a detached tensor; zeros if none has been accumulated.
  Tensor grad() const;
  void zero_grad();

  // New leaf holding a copy of the values, disconnected from the graph.
  Tensor detach() const;
  Tensor clone() const { return detach(); }
  Tensor to(DType dtype) const;

  // Reverse-mode pass from a scalar. Leaf grads accumulate across calls.
  void backward() const;

  // Same-node identity.
  bool same(const Tensor& other) const { return node_ == other.node_; }

  // Internal: ops build graph nodes through these.
  explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}
  const std::shared_ptr<detail::Node>& node() const { return node_; }

 private:
  template <class T>
  void check_type() const {
    require_defined();
    if (dtype() != dtype_of<T>()) throw_dtype_mismatch(dtype_of<T>());
  }
  void require_defined() const;
  void check_leaf(const char* what) const;
  [[noreturn]] void throw_dtype_mismatch(DType requested) const;

  std::shared_ptr<detail::Node> node_;
};

// Nodes reachable from root, inputs before consumers, each exactly once.
std::vector<std::shared_ptr<detail::Node>> topological_order(const Tensor& root);

}  // namespace brainalign
