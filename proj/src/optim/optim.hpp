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

#ifndef METALOOP_OPTIM_OPTIM_HPP
#define METALOOP_OPTIM_OPTIM_HPP

#include <cstdint>
#include <optional>
#include <string>

#include "models/paramset.hpp"

namespace metaloop {

struct AdamaxHyper {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// First moment m and infinity-norm accumulator u, aligned to the
/// parameters by name, plus the step count.
struct AdamaxState {
  GradSet m;
  GradSet u;
  std::int64_t t = 0;
  AdamaxHyper hyper;

  static AdamaxState fresh(const ParamSet& params, AdamaxHyper hyper = {});
};

struct AdamaxResult {
  ParamSet params;
  AdamaxState state;
};

/// m <- b1 m + (1 - b1) g;  u <- max(b2 u, |g|);
/// p <- p - lr / (1 - b1^t) * m / (u + eps).
/// Pure: returns new parameters (fresh leaves) and a new state.
AdamaxResult adamax_step(const AdamaxState& state, const ParamSet& params,
                         const GradSet& grads, double lr);

/// p - alpha * g; keeps the tape, see param_axpy.
inline ParamSet sgd_step(const ParamSet& params, const GradSet& grads, double alpha) {
  return param_axpy(params, grads, alpha);
}

/// Linear warmup to `peak_lr`, then linear decay to zero at `total_steps`.
struct ScheduleSpec {
  double peak_lr = 5e-5;
  std::int64_t total_steps = 1;
  double warmup_fraction = 0.1;

  void validate() const;
  std::int64_t warmup_steps() const;
};

double lr_at(std::int64_t step, const ScheduleSpec& spec);

struct Checkpoint {
  ParamSet params;
  std::optional<AdamaxState> optimizer;
};

/// Writes parameters and (optionally) optimizer state into one MLPS1
/// container; optimizer entries live under the "opt/" prefix.
void save_checkpoint(const std::string& path, const ParamSet& params,
                     const AdamaxState* optimizer = nullptr);
/// Parameters come back as leaves that require grad.
Checkpoint load_checkpoint(const std::string& path);

}  // namespace metaloop

#endif  // METALOOP_OPTIM_OPTIM_HPP
