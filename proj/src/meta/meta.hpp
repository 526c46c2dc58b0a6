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

#ifndef METALOOP_META_META_HPP
#define METALOOP_META_META_HPP

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "autodiff/rng.hpp"
#include "models/model.hpp"
#include "models/paramset.hpp"
#include "optim/optim.hpp"

namespace metaloop {

enum class InnerScope { all, encoder_only, head_only };

struct MetaConfig {
  double inner_lr = 5e-5;
  double outer_lr = 5e-5;
  int inner_steps = 3;
  std::size_t meta_batch = 4;
  std::size_t support_size = 32;
  std::size_t query_size = 32;
  int epochs = 5;
  // 0 derives the count from the summed train sizes.
  std::int64_t steps_per_epoch = 0;
  double warmup_fraction = 0.1;
  bool first_order = false;
  double clip = 1.0;
  InnerScope inner_scope = InnerScope::all;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Support and query index lists into one task's train split.
struct Episode {
  std::string task;
  std::vector<std::size_t> support;
  std::vector<std::size_t> query;
};

/// A plain supervised batch, the joint trainer's unit of work.
struct TaskBatch {
  std::string task;
  std::vector<std::size_t> examples;
};

/// Scalar loss of `params` on the listed train examples of `task`.
using TaskObjective = std::function<ad::Tensor(
    const ParamSet& params, const std::string& task,
    std::span<const std::size_t> examples, ForwardMode mode, const RngStream& stream)>;

/// Dropout stream for one forward pass. Inner steps use their index, the
/// query (or joint batch) pass uses `kQueryPass`.
inline constexpr int kQueryPass = -1;
RngStream pass_stream(std::uint64_t seed, std::int64_t step, std::size_t episode,
                      const std::string& task, int pass);

/// K SGD steps on the support loss. With create_graph the result stays
/// differentiable with respect to `params`.
ParamSet inner_adapt(const ParamSet& params, const TaskObjective& objective,
                     const std::string& task, std::span<const std::size_t> support,
                     const MetaConfig& cfg, bool create_graph, std::int64_t step = 0,
                     std::size_t episode = 0);

/// Sum over episodes of the query loss at each episode's adapted params.
ad::Tensor meta_loss(const ParamSet& params, std::span<const Episode> episodes,
                     const TaskObjective& objective, const MetaConfig& cfg,
                     std::int64_t step = 0);

struct OuterGradient {
  GradSet grads;
  double loss = 0;
};

/// Gradient of meta_loss, computed per episode (possibly in parallel) and
/// summed in episode order.
OuterGradient meta_gradient(const ParamSet& params, std::span<const Episode> episodes,
                            const TaskObjective& objective, const MetaConfig& cfg,
                            std::int64_t step = 0);

/// Gradient of the summed batch losses at params.
OuterGradient joint_gradient(const ParamSet& params, std::span<const TaskBatch> batches,
                             const TaskObjective& objective, const MetaConfig& cfg,
                             std::int64_t step = 0);

struct StepResult {
  ParamSet params;
  AdamaxState state;
  double loss = 0;
  double grad_norm = 0;
};

/// One outer update. `step` is 0-based; the update uses lr_at(step + 1).
StepResult maml_outer_step(const ParamSet& params, const AdamaxState& state,
                           std::span<const Episode> episodes,
                           const TaskObjective& objective, const MetaConfig& cfg,
                           const ScheduleSpec& schedule, std::int64_t step);

StepResult joint_multitask_step(const ParamSet& params, const AdamaxState& state,
                                std::span<const TaskBatch> batches,
                                const TaskObjective& objective, const MetaConfig& cfg,
                                const ScheduleSpec& schedule, std::int64_t step);

/// n draws with P(i) = sizes[i] / sum(sizes).
std::vector<std::string> sample_task_batch(std::span<const std::string> tasks,
                                           std::span<const std::size_t> sizes,
                                           std::size_t n, const RngStream& stream);

/// Disjoint support/query draw without replacement from [0, train_size).
/// Small splits are divided proportionally, keeping at least one query.
Episode make_episode(const std::string& task, std::size_t train_size,
                     std::size_t support_size, std::size_t query_size,
                     const RngStream& stream);

struct TaskInfo {
  std::string id;
  std::size_t train_size = 0;
};

std::int64_t steps_per_epoch(const MetaConfig& cfg, std::span<const TaskInfo> tasks);

struct TrainHooks {
  // Called after every outer step with the 1-based step count.
  std::function<void(std::int64_t step, const StepResult&)> on_step;
  std::function<void(int epoch, const ParamSet&, const AdamaxState&)> on_epoch;
};

struct TrainResult {
  ParamSet params;
  AdamaxState state;
  std::int64_t steps = 0;
};

enum class TrainMode { meta, joint };

/// Outer loop over sampled task batches. Joint mode draws one plain batch
/// of query_size per sampled task. Throws ErrorKind::numeric on a
/// non-finite loss.
TrainResult train_loop(TrainMode mode, const ParamSet& init, std::span<const TaskInfo> tasks,
                       const TaskObjective& objective, const MetaConfig& cfg,
                       const TrainHooks& hooks = {});

struct FineTuneConfig {
  double lr = 5e-5;
  int epochs = 5;
  std::size_t batch_size = 32;
  // Caps the total number of updates when positive.
  std::int64_t max_steps = 0;
  double warmup_fraction = 0.1;
  double clip = 1.0;
  std::uint64_t seed = 0;
  bool sgd = false;

  void validate() const;
};

struct FineTuneRecord {
  int epoch = 0;
  std::int64_t step = 0;
  double train_loss = 0;
  double dev_metric = 0;
};

struct FineTuneResult {
  ParamSet params;
  std::vector<FineTuneRecord> history;
};

/// Supervised loop on one task; `dev_metric` is evaluated after each epoch
/// when provided.
FineTuneResult fine_tune(const ParamSet& params, const TaskObjective& objective,
                         const std::string& task, std::span<const std::size_t> train,
                         const FineTuneConfig& cfg,
                         const std::function<double(const ParamSet&)>& dev_metric = {},
                         const std::function<void(const FineTuneRecord&, const ParamSet&)>& on_epoch = {});

/// Worker count from METALOOP_THREADS, else the hardware concurrency.
std::size_t worker_count();

}  // namespace metaloop

#endif  // METALOOP_META_META_HPP
