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

#include "models/paramset.hpp"

#include <algorithm>
#include <cstring>

#include "autodiff/ops.hpp"
#include "common/error.hpp"

namespace metaloop {

ParamSet::ParamSet(std::vector<NamedTensor> entries, std::uint64_t version)
    : entries_(std::move(entries)), version_(version) {
  auto index = std::make_shared<std::unordered_map<std::string, std::size_t>>();
  index->reserve(entries_.size());
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (!entries_[i].value.defined()) {
      fail(ErrorKind::invalid_argument, "undefined tensor for '" + entries_[i].name + "'");
    }
    if (!index->emplace(entries_[i].name, i).second) {
      fail(ErrorKind::invalid_argument, "duplicate parameter name '" + entries_[i].name + "'");
    }
  }
  index_ = std::move(index);
}

bool ParamSet::contains(std::string_view name) const {
  return index_ && index_->count(std::string(name)) > 0;
}

const ad::Tensor& ParamSet::at(std::string_view name) const {
  if (index_) {
    auto it = index_->find(std::string(name));
    if (it != index_->end()) return entries_[it->second].value;
  }
  fail(ErrorKind::invalid_argument, "no parameter named '" + std::string(name) + "'");
}

std::vector<ad::Tensor> ParamSet::tensors() const {
  std::vector<ad::Tensor> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(e.value);
  return out;
}

std::vector<std::string> ParamSet::names() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(e.name);
  return out;
}

bool ParamSet::same_layout(const ParamSet& other) const {
  if (size() != other.size()) return false;
  for (std::size_t i = 0; i < size(); ++i) {
    if (entries_[i].name != other.entries_[i].name ||
        entries_[i].value.shape() != other.entries_[i].value.shape()) {
      return false;
    }
  }
  return true;
}

std::size_t ParamSet::element_count() const {
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.value.size();
  return n;
}

ParamSet ParamSet::filtered(const std::function<bool(std::string_view)>& keep) const {
  std::vector<NamedTensor> out;
  for (const auto& e : entries_) {
    if (keep(e.name)) out.push_back(e);
  }
  return ParamSet(std::move(out), version_);
}

ParamSet ParamSet::with_updates(const ParamSet& updates) const {
  std::vector<NamedTensor> out = entries_;
  for (const auto& u : updates.entries()) {
    auto it = index_ ? index_->find(u.name) : decltype(index_->end()){};
    if (!index_ || it == index_->end()) {
      fail(ErrorKind::invalid_argument, "update for unknown parameter '" + u.name + "'");
    }
    if (out[it->second].value.shape() != u.value.shape()) {
      fail(ErrorKind::shape, "update for '" + u.name + "' has shape " +
                                 ad::shape_string(u.value.shape()));
    }
    out[it->second].value = u.value;
  }
  ParamSet result;
  result.entries_ = std::move(out);
  result.index_ = index_;
  result.version_ = version_;
  return result;
}

ParamSet ParamSet::merged(const ParamSet& extra) const {
  std::vector<NamedTensor> out = entries_;
  for (const auto& e : extra.entries()) {
    if (!contains(e.name)) out.push_back(e);
  }
  return ParamSet(std::move(out), version_);
}

ParamSet ParamSet::with_version(std::uint64_t version) const {
  ParamSet copy = *this;
  copy.version_ = version;
  return copy;
}

ParamSet ParamSet::detached() const {
  ParamSet copy = *this;
  for (auto& e : copy.entries_) e.value = e.value.detach();
  return copy;
}

ParamSet ParamSet::as_parameters() const {
  ParamSet copy = *this;
  for (auto& e : copy.entries_) e.value = e.value.as_parameter();
  return copy;
}

bool ParamSet::bit_equal(const ParamSet& other) const {
  if (!same_layout(other)) return false;
  for (std::size_t i = 0; i < size(); ++i) {
    const auto& a = entries_[i].value.values();
    const auto& b = other.entries_[i].value.values();
    if (std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) != 0) return false;
  }
  return true;
}

GradSet grad(const ad::Tensor& output, const ParamSet& wrt, bool create_graph) {
  const std::vector<ad::Tensor> targets = wrt.tensors();
  std::vector<ad::Tensor> grads = ad::grad(output, targets, create_graph);
  std::vector<NamedTensor> out;
  out.reserve(grads.size());
  for (std::size_t i = 0; i < grads.size(); ++i) {
    out.push_back({wrt[i].name, std::move(grads[i])});
  }
  return GradSet(std::move(out));
}

GradSet zeros_like(const ParamSet& params) {
  std::vector<NamedTensor> out;
  out.reserve(params.size());
  for (const auto& e : params.entries()) {
    out.push_back({e.name, ad::Tensor::zeros(e.value.shape())});
  }
  return GradSet(std::move(out));
}

double global_norm(const GradSet& grads) {
  const auto t = grads.tensors();
  return ad::global_norm(t);
}

GradSet clip_by_global_norm(const GradSet& grads, double max_norm) {
  const auto t = grads.tensors();
  std::vector<ad::Tensor> clipped = ad::clip_by_global_norm(t, max_norm);
  std::vector<NamedTensor> out;
  out.reserve(clipped.size());
  for (std::size_t i = 0; i < clipped.size(); ++i) {
    out.push_back({grads[i].name, std::move(clipped[i])});
  }
  return GradSet(std::move(out));
}

namespace {

void require_aligned(const ParamSet& a, const ParamSet& b, const char* what) {
  if (!a.same_layout(b)) {
    std::string detail;
    for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) {
      if (a[i].name != b[i].name) {
        detail = ": '" + a[i].name + "' vs '" + b[i].name + "'";
        break;
      }
      if (a[i].value.shape() != b[i].value.shape()) {
        detail = ": '" + a[i].name + "' " + ad::shape_string(a[i].value.shape()) +
                 " vs " + ad::shape_string(b[i].value.shape());
        break;
      }
    }
    if (detail.empty()) {
      detail = ": " + std::to_string(a.size()) + " vs " + std::to_string(b.size()) + " entries";
    }
    fail(ErrorKind::invalid_argument, std::string(what) + ": misaligned names" + detail);
  }
}

}  // namespace

GradSet accumulate(const GradSet& a, const GradSet& b) {
  require_aligned(a, b, "accumulate");
  std::vector<NamedTensor> out;
  out.reserve(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    std::vector<double> v = a[i].value.values();
    const auto& w = b[i].value.values();
    for (std::size_t j = 0; j < v.size(); ++j) v[j] += w[j];
    out.push_back({a[i].name, ad::Tensor::constant(a[i].value.shape(), std::move(v))});
  }
  return GradSet(std::move(out));
}

ParamSet param_axpy(const ParamSet& params, const GradSet& grads, double alpha) {
  require_aligned(params, grads, "param_axpy");
  if (alpha == 0.0) return params;
  std::vector<NamedTensor> out;
  out.reserve(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    out.push_back({params[i].name,
                   ad::sub(params[i].value, ad::scale(grads[i].value, alpha))});
  }
  return ParamSet(std::move(out), params.version());
}

}  // namespace metaloop
