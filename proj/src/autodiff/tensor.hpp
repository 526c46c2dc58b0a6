// Copyright 2026 The metaloop Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef METALOOP_AUTODIFF_TENSOR_HPP
#define METALOOP_AUTODIFF_TENSOR_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace metaloop::ad {

using Shape = std::vector<std::size_t>;

std::size_t element_count(const Shape& shape);
std::string shape_string(const Shape& shape);

class Tensor;

/// Maps the gradient flowing into a node's output onto one gradient per
/// input. Built from differentiable ops, so running it with recording
/// enabled extends the graph (grad-of-grad).
using BackwardFn = std::function<std::vector<Tensor>(const Tensor& grad_out)>;

/// One entry of the differentiation tape. Ids increase with creation order,
/// so every node's inputs carry smaller ids than the node itself.
struct Node {
  Shape shape;
  std::shared_ptr<const std::vector<double>> data;
  bool requires_grad = false;
  std::uint64_t id = 0;
  const char* op = "const";
  std::vector<Tensor> inputs;
  BackwardFn backward;
};

/// Immutable dense row-major array of doubles, optionally attached to the
/// differentiation tape. Copies are cheap and share the underlying node.
class Tensor {
 public:
  Tensor() = default;

  static Tensor constant(Shape shape, std::vector<double> data);
  static Tensor parameter(Shape shape, std::vector<double> data);
  static Tensor scalar(double value);
  static Tensor zeros(const Shape& shape);
  static Tensor full(const Shape& shape, double value);

  /// Internal: joins a new node to the tape when recording is enabled and
  /// any input requires grad, otherwise returns a constant.
  static Tensor make_result(Shape shape, std::vector<double> data,
                            std::vector<Tensor> inputs, BackwardFn backward,
                            const char* op);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  std::size_t rank() const { return node_->shape.size(); }
  std::size_t dim(std::size_t axis) const { return node_->shape.at(axis); }
  std::size_t size() const { return node_->data->size(); }
  std::span<const double> data() const { return *node_->data; }
  const std::vector<double>& values() const { return *node_->data; }
  double operator[](std::size_t i) const { return (*node_->data)[i]; }
  double item() const;

  bool requires_grad() const { return node_->requires_grad; }
  bool is_leaf() const { return node_->requires_grad && node_->inputs.empty(); }
  /// Tape id; absent for constants.
  std::optional<std::uint64_t> node_id() const;
  const char* op_name() const { return node_->op; }

  /// Same values, cut from the tape.
  Tensor detach() const;
  /// Same values as a fresh leaf that requires grad.
  Tensor as_parameter() const;

  const Node& node() const { return *node_; }
  const std::shared_ptr<const Node>& node_ptr() const { return node_; }

 private:
  explicit Tensor(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

/// Whether ops on this thread record onto the tape.
bool grad_mode_enabled();

class GradModeGuard {
 public:
  explicit GradModeGuard(bool enabled);
  ~GradModeGuard();
  GradModeGuard(const GradModeGuard&) = delete;
  GradModeGuard& operator=(const GradModeGuard&) = delete;

 private:
  bool previous_;
};

/// Reverse-mode gradients of a scalar `output` with respect to each tensor in
/// `wrt`. Unreached inputs get zeros of their shape. With `create_graph` the
/// returned gradients are themselves on the tape.
std::vector<Tensor> grad(const Tensor& output, std::span<const Tensor> wrt,
                         bool create_graph = false);

double global_norm(std::span<const Tensor> grads);

/// Rescales so the global L2 norm is at most `max_norm`. Outputs are constants.
std::vector<Tensor> clip_by_global_norm(std::span<const Tensor> grads,
                                        double max_norm);

}  // namespace metaloop::ad

#endif  // METALOOP_AUTODIFF_TENSOR_HPP
