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

#ifndef METALOOP_MODELS_PARAMSET_HPP
#define METALOOP_MODELS_PARAMSET_HPP

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "autodiff/tensor.hpp"

namespace metaloop {

struct NamedTensor {
  std::string name;
  ad::Tensor value;
};

/// Ordered, named collection of tensors. Used both for parameters (theta and
/// adapted theta') and for gradients aligned to them. Values, never mutated
/// in place: every update returns a new set.
class ParamSet {
 public:
  ParamSet() = default;
  explicit ParamSet(std::vector<NamedTensor> entries, std::uint64_t version = 0);

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const std::vector<NamedTensor>& entries() const { return entries_; }
  const NamedTensor& operator[](std::size_t i) const { return entries_[i]; }
  std::uint64_t version() const { return version_; }

  bool contains(std::string_view name) const;
  const ad::Tensor& at(std::string_view name) const;
  std::vector<ad::Tensor> tensors() const;
  std::vector<std::string> names() const;

  /// Same names in the same order with the same shapes.
  bool same_layout(const ParamSet& other) const;
  std::size_t element_count() const;

  ParamSet filtered(const std::function<bool(std::string_view)>& keep) const;
  /// Copy with entries of `updates` substituted by name; layout unchanged.
  ParamSet with_updates(const ParamSet& updates) const;
  /// Appends entries not already present.
  ParamSet merged(const ParamSet& extra) const;
  ParamSet with_version(std::uint64_t version) const;
  /// All entries cut from the tape.
  ParamSet detached() const;
  /// All entries as fresh leaves that require grad.
  ParamSet as_parameters() const;

  /// Bit-identical names, shapes and values.
  bool bit_equal(const ParamSet& other) const;

 private:
  std::vector<NamedTensor> entries_;
  std::shared_ptr<const std::unordered_map<std::string, std::size_t>> index_;
  std::uint64_t version_ = 0;
};

using GradSet = ParamSet;

/// Gradients of a scalar with respect to every entry of `wrt`, named alike.
GradSet grad(const ad::Tensor& output, const ParamSet& wrt, bool create_graph);
/// Zero-valued gradients shaped like `params`.
GradSet zeros_like(const ParamSet& params);

double global_norm(const GradSet& grads);
GradSet clip_by_global_norm(const GradSet& grads, double max_norm);
/// Entrywise a + b for aligned sets; the result is constant.
GradSet accumulate(const GradSet& a, const GradSet& b);

/// p' = p - alpha * g, entry by entry. Stays on the tape when either side
/// does, which is what makes the outer update second-order.
ParamSet param_axpy(const ParamSet& params, const GradSet& grads, double alpha);

}  // namespace metaloop

#endif  // METALOOP_MODELS_PARAMSET_HPP
