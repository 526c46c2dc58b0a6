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

#include "optim/optim.hpp"

#include <algorithm>
#include <cmath>

#include "common/error.hpp"
#include "models/serialize.hpp"

namespace metaloop {

AdamaxState AdamaxState::fresh(const ParamSet& params, AdamaxHyper hyper) {
  AdamaxState s;
  s.m = zeros_like(params);
  s.u = zeros_like(params);
  s.hyper = hyper;
  return s;
}

AdamaxResult adamax_step(const AdamaxState& state, const ParamSet& params,
                         const GradSet& grads, double lr) {
  if (!(lr >= 0.0)) fail(ErrorKind::invalid_argument, "adamax_step: lr must be >= 0");
  if (!state.m.same_layout(params) || !state.u.same_layout(params)) {
    fail(ErrorKind::invalid_argument, "adamax_step: optimizer state misaligned with parameters");
  }
  if (!grads.same_layout(params)) {
    fail(ErrorKind::invalid_argument, "adamax_step: gradients misaligned with parameters");
  }
  const AdamaxHyper& h = state.hyper;
  const std::int64_t t = state.t + 1;
  const double step_size = lr / (1.0 - std::pow(h.beta1, static_cast<double>(t)));

  std::vector<NamedTensor> new_params, new_m, new_u;
  new_params.reserve(params.size());
  new_m.reserve(params.size());
  new_u.reserve(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& p = params[i].value.values();
    const auto& g = grads[i].value.values();
    std::vector<double> m = state.m[i].value.values();
    std::vector<double> u = state.u[i].value.values();
    std::vector<double> out(p.size());
    for (std::size_t j = 0; j < p.size(); ++j) {
      m[j] = h.beta1 * m[j] + (1.0 - h.beta1) * g[j];
      u[j] = std::max(h.beta2 * u[j], std::abs(g[j]));
      out[j] = p[j] - step_size * m[j] / (u[j] + h.epsilon);
    }
    const auto& shape = params[i].value.shape();
    new_params.push_back({params[i].name, ad::Tensor::parameter(shape, std::move(out))});
    new_m.push_back({params[i].name, ad::Tensor::constant(shape, std::move(m))});
    new_u.push_back({params[i].name, ad::Tensor::constant(shape, std::move(u))});
  }
  AdamaxState next;
  next.m = GradSet(std::move(new_m));
  next.u = GradSet(std::move(new_u));
  next.t = t;
  next.hyper = h;
  return {ParamSet(std::move(new_params), params.version() + 1), std::move(next)};
}

void ScheduleSpec::validate() const {
  if (total_steps < 1) fail(ErrorKind::invalid_argument, "schedule: total_steps must be >= 1");
  if (!(warmup_fraction >= 0.0) || warmup_fraction >= 1.0) {
    fail(ErrorKind::invalid_argument, "schedule: warmup_fraction must lie in [0, 1)");
  }
}

std::int64_t ScheduleSpec::warmup_steps() const {
  const auto w = static_cast<std::int64_t>(
      std::llround(warmup_fraction * static_cast<double>(total_steps)));
  return std::min(w, total_steps - 1);
}

double lr_at(std::int64_t step, const ScheduleSpec& spec) {
  spec.validate();
  if (step < 0 || step > spec.total_steps) {
    fail(ErrorKind::invalid_argument, "lr_at: step " + std::to_string(step) +
                                          " outside [0, " +
                                          std::to_string(spec.total_steps) + "]");
  }
  const std::int64_t w = spec.warmup_steps();
  if (w > 0 && step <= w) {
    return spec.peak_lr * static_cast<double>(step) / static_cast<double>(w);
  }
  return spec.peak_lr * static_cast<double>(spec.total_steps - step) /
         static_cast<double>(spec.total_steps - w);
}

void save_checkpoint(const std::string& path, const ParamSet& params,
                     const AdamaxState* optimizer) {
  std::vector<NamedTensor> entries = params.entries();
  if (optimizer) {
    for (const auto& e : optimizer->m.entries()) entries.push_back({"opt/m/" + e.name, e.value});
    for (const auto& e : optimizer->u.entries()) entries.push_back({"opt/u/" + e.name, e.value});
    entries.push_back({"opt/t", ad::Tensor::constant({1}, {static_cast<double>(optimizer->t)})});
    const AdamaxHyper& h = optimizer->hyper;
    entries.push_back({"opt/hyper", ad::Tensor::constant({3}, {h.beta1, h.beta2, h.epsilon})});
  }
  save_tensors(path, entries);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::vector<NamedTensor> params, m, u;
  std::optional<double> t;
  AdamaxHyper hyper;
  for (auto& e : load_tensors(path)) {
    if (e.name.rfind("opt/m/", 0) == 0) {
      m.push_back({e.name.substr(6), e.value});
    } else if (e.name.rfind("opt/u/", 0) == 0) {
      u.push_back({e.name.substr(6), e.value});
    } else if (e.name == "opt/t") {
      t = e.value[0];
    } else if (e.name == "opt/hyper") {
      hyper = {e.value[0], e.value[1], e.value[2]};
    } else {
      params.push_back({e.name, e.value.as_parameter()});
    }
  }
  Checkpoint ck;
  ck.params = ParamSet(std::move(params));
  if (t) {
    AdamaxState s;
    s.m = GradSet(std::move(m));
    s.u = GradSet(std::move(u));
    s.t = static_cast<std::int64_t>(*t);
    s.hyper = hyper;
    if (!s.m.same_layout(ck.params) || !s.u.same_layout(ck.params)) {
      fail(ErrorKind::data, "checkpoint '" + path + "': optimizer state misaligned");
    }
    ck.optimizer = std::move(s);
  }
  return ck;
}

}  // namespace metaloop
