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

#include "autodiff/tensor.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "autodiff/ops.hpp"
#include "common/error.hpp"

namespace metaloop::ad {

namespace {

std::atomic<std::uint64_t> g_next_id{1};
thread_local bool t_grad_enabled = true;

std::shared_ptr<Node> new_node(Shape shape, std::vector<double> data) {
  if (element_count(shape) != data.size()) {
    fail(ErrorKind::shape, "tensor data length " + std::to_string(data.size()) +
                               " does not match shape " + shape_string(shape));
  }
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->data = std::make_shared<const std::vector<double>>(std::move(data));
  return node;
}

}  // namespace

std::size_t element_count(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

Tensor Tensor::constant(Shape shape, std::vector<double> data) {
  return Tensor(new_node(std::move(shape), std::move(data)));
}

Tensor Tensor::parameter(Shape shape, std::vector<double> data) {
  auto node = new_node(std::move(shape), std::move(data));
  node->requires_grad = true;
  node->id = g_next_id.fetch_add(1, std::memory_order_relaxed);
  node->op = "leaf";
  return Tensor(std::move(node));
}

Tensor Tensor::scalar(double value) { return constant({}, {value}); }

Tensor Tensor::zeros(const Shape& shape) { return full(shape, 0.0); }

Tensor Tensor::full(const Shape& shape, double value) {
  return constant(shape, std::vector<double>(element_count(shape), value));
}

Tensor Tensor::make_result(Shape shape, std::vector<double> data,
                           std::vector<Tensor> inputs, BackwardFn backward,
                           const char* op) {
  auto node = new_node(std::move(shape), std::move(data));
  const bool record =
      t_grad_enabled &&
      std::any_of(inputs.begin(), inputs.end(),
                  [](const Tensor& t) { return t.requires_grad(); });
  if (record) {
    node->requires_grad = true;
    node->id = g_next_id.fetch_add(1, std::memory_order_relaxed);
    node->op = op;
    node->inputs = std::move(inputs);
    node->backward = std::move(backward);
  }
  return Tensor(std::move(node));
}

double Tensor::item() const {
  if (size() != 1) {
    fail(ErrorKind::shape, "item() on tensor of shape " + shape_string(shape()));
  }
  return (*node_->data)[0];
}

std::optional<std::uint64_t> Tensor::node_id() const {
  if (!node_->requires_grad) return std::nullopt;
  return node_->id;
}

Tensor Tensor::detach() const {
  auto node = std::make_shared<Node>();
  node->shape = node_->shape;
  node->data = node_->data;
  return Tensor(std::move(node));
}

Tensor Tensor::as_parameter() const {
  auto node = std::make_shared<Node>();
  node->shape = node_->shape;
  node->data = node_->data;
  node->requires_grad = true;
  node->id = g_next_id.fetch_add(1, std::memory_order_relaxed);
  node->op = "leaf";
  return Tensor(std::move(node));
}

bool grad_mode_enabled() { return t_grad_enabled; }

GradModeGuard::GradModeGuard(bool enabled) : previous_(t_grad_enabled) {
  t_grad_enabled = enabled;
}

GradModeGuard::~GradModeGuard() { t_grad_enabled = previous_; }

std::vector<Tensor> grad(const Tensor& output, std::span<const Tensor> wrt,
                         bool create_graph) {
  if (!output.defined() || output.size() != 1) {
    fail(ErrorKind::shape,
         "grad() needs a scalar output, got shape " +
             (output.defined() ? shape_string(output.shape()) : "<undefined>"));
  }

  std::vector<Tensor> result;
  result.reserve(wrt.size());
  if (!output.requires_grad()) {
    for (const Tensor& w : wrt) result.push_back(Tensor::zeros(w.shape()));
    return result;
  }

  std::unordered_set<const Node*> targets;
  for (const Tensor& w : wrt) {
    if (w.requires_grad()) targets.insert(&w.node());
  }

  // Post-order walk marking nodes with a path down to some target.
  std::unordered_map<const Node*, bool> needed;
  std::vector<const Node*> order;
  {
    struct Frame {
      const Node* node;
      std::size_t next_input;
    };
    std::vector<Frame> stack{{&output.node(), 0}};
    needed.emplace(&output.node(), targets.count(&output.node()) > 0);
    while (!stack.empty()) {
      Frame& top = stack.back();
      if (top.next_input < top.node->inputs.size()) {
        const Tensor& in = top.node->inputs[top.next_input++];
        if (!in.requires_grad()) continue;
        const Node* child = &in.node();
        if (needed.emplace(child, targets.count(child) > 0).second) {
          stack.push_back({child, 0});
        }
        continue;
      }
      const Node* done = top.node;
      stack.pop_back();
      bool any = needed[done];
      for (const Tensor& in : done->inputs) {
        if (in.requires_grad() && needed[&in.node()]) any = true;
      }
      needed[done] = any;
      if (any) order.push_back(done);
    }
  }
  std::sort(order.begin(), order.end(),
            [](const Node* a, const Node* b) { return a->id > b->id; });

  GradModeGuard guard(create_graph);
  std::unordered_map<const Node*, Tensor> grads;
  grads.emplace(&output.node(), Tensor::full(output.shape(), 1.0));

  for (const Node* node : order) {
    auto it = grads.find(node);
    if (it == grads.end() || !node->backward) continue;
    const Tensor g = it->second;
    std::vector<Tensor> input_grads = node->backward(g);
    for (std::size_t i = 0; i < node->inputs.size(); ++i) {
      const Tensor& in = node->inputs[i];
      if (!in.requires_grad() || !needed[&in.node()]) continue;
      if (i >= input_grads.size() || !input_grads[i].defined()) continue;
      auto [slot, inserted] = grads.try_emplace(&in.node(), input_grads[i]);
      if (!inserted) slot->second = add(slot->second, input_grads[i]);
    }
    if (!targets.count(node)) grads.erase(node);
  }

  for (const Tensor& w : wrt) {
    auto it = w.requires_grad() ? grads.find(&w.node()) : grads.end();
    if (it == grads.end()) {
      result.push_back(Tensor::zeros(w.shape()));
    } else {
      result.push_back(create_graph ? it->second : it->second.detach());
    }
  }
  return result;
}

double global_norm(std::span<const Tensor> grads) {
  double total = 0.0;
  for (const Tensor& g : grads) {
    for (double v : g.data()) total += v * v;
  }
  return std::sqrt(total);
}

std::vector<Tensor> clip_by_global_norm(std::span<const Tensor> grads,
                                        double max_norm) {
  if (!(max_norm > 0.0)) {
    fail(ErrorKind::invalid_argument, "clip_by_global_norm: max_norm must be > 0");
  }
  const double norm = global_norm(grads);
  std::vector<Tensor> out;
  out.reserve(grads.size());
  if (norm <= max_norm) {
    for (const Tensor& g : grads) out.push_back(g.detach());
    return out;
  }
  const double factor = max_norm / norm;
  for (const Tensor& g : grads) {
    std::vector<double> v(g.data().begin(), g.data().end());
    for (double& x : v) x *= factor;
    out.push_back(Tensor::constant(g.shape(), std::move(v)));
  }
  return out;
}

}  // namespace metaloop::ad
