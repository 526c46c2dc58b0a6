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

#include "meta/meta.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <numeric>
#include <thread>

#include "autodiff/ops.hpp"
#include "common/error.hpp"

namespace metaloop {

void MetaConfig::validate() const {
  if (!(inner_lr > 0)) fail(ErrorKind::config, "meta.inner_lr must be > 0");
  if (!(outer_lr > 0)) fail(ErrorKind::config, "meta.outer_lr must be > 0");
  if (inner_steps < 0) fail(ErrorKind::config, "meta.inner_steps must be >= 0");
  if (meta_batch < 1) fail(ErrorKind::config, "meta.meta_batch must be >= 1");
  if (query_size < 1) fail(ErrorKind::config, "meta.query_size must be >= 1");
  if (inner_steps > 0 && support_size < 1)
    fail(ErrorKind::config, "meta.support_size must be >= 1 when inner_steps > 0");
  if (epochs < 0) fail(ErrorKind::config, "meta.epochs must be >= 0");
  if (steps_per_epoch < 0) fail(ErrorKind::config, "meta.steps_per_epoch must be >= 0");
  if (!(warmup_fraction >= 0 && warmup_fraction < 1))
    fail(ErrorKind::config, "meta.warmup_fraction must be in [0, 1)");
  if (clip < 0) fail(ErrorKind::config, "meta.clip must be >= 0");
}

void FineTuneConfig::validate() const {
  if (!(lr > 0)) fail(ErrorKind::config, "finetune.lr must be > 0");
  if (epochs < 0) fail(ErrorKind::config, "finetune.epochs must be >= 0");
  if (batch_size < 1) fail(ErrorKind::config, "finetune.batch_size must be >= 1");
  if (max_steps < 0) fail(ErrorKind::config, "finetune.max_steps must be >= 0");
  if (!(warmup_fraction >= 0 && warmup_fraction < 1))
    fail(ErrorKind::config, "finetune.warmup_fraction must be in [0, 1)");
  if (clip < 0) fail(ErrorKind::config, "finetune.clip must be >= 0");
}

std::size_t worker_count() {
  if (const char* env = std::getenv("METALOOP_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

bool in_scope(InnerScope scope, std::string_view name) {
  switch (scope) {
    case InnerScope::encoder_only:
      return !is_head_param(name);
    case InnerScope::head_only:
      return is_head_param(name);
    case InnerScope::all:
      break;
  }
  return true;
}

// Runs fn(i) for i in [0, n) on up to worker_count() threads. The first
// exception by index is rethrown.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  const std::size_t workers = std::min(worker_count(), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(n);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) {
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

OuterGradient reduce(const ParamSet& params, std::vector<GradSet>& grads,
                     const std::vector<double>& losses) {
  OuterGradient out;
  out.grads = zeros_like(params);
  for (std::size_t i = 0; i < grads.size(); ++i) {
    out.grads = accumulate(out.grads, grads[i]);
    out.loss += losses[i];
  }
  return out;
}

StepResult apply_update(const ParamSet& params, const AdamaxState& state,
                        OuterGradient g, const MetaConfig& cfg,
                        const ScheduleSpec& schedule, std::int64_t step) {
  StepResult r;
  r.loss = g.loss;
  r.grad_norm = global_norm(g.grads);
  if (r.grad_norm == 0.0) {
    r.params = params;
    r.state = state;
    return r;
  }
  const GradSet clipped = cfg.clip > 0 ? clip_by_global_norm(g.grads, cfg.clip) : g.grads;
  auto upd = adamax_step(state, params, clipped, lr_at(step + 1, schedule));
  r.params = std::move(upd.params);
  r.state = std::move(upd.state);
  return r;
}

ParamSet leaves(const ParamSet& params) {
  for (const auto& e : params.entries())
    if (!e.value.is_leaf()) return params.as_parameters();
  return params;
}

}  // namespace

RngStream pass_stream(std::uint64_t seed, std::int64_t step, std::size_t episode,
                      const std::string& task, int pass) {
  return RngStream(seed, "dropout")
      .child(static_cast<std::uint64_t>(step))
      .child(episode)
      .child(task)
      .child(static_cast<std::uint64_t>(static_cast<std::int64_t>(pass)));
}

ParamSet inner_adapt(const ParamSet& params, const TaskObjective& objective,
                     const std::string& task, std::span<const std::size_t> support,
                     const MetaConfig& cfg, bool create_graph, std::int64_t step,
                     std::size_t episode) {
  if (cfg.inner_steps < 0) fail(ErrorKind::invalid_argument, "inner_steps must be >= 0");
  if (cfg.inner_steps == 0) return params;
  if (support.empty()) fail(ErrorKind::invalid_argument, "empty support set for task " + task);
  const auto keep = [&](std::string_view n) { return in_scope(cfg.inner_scope, n); };
  ParamSet adapted = params;
  for (int k = 0; k < cfg.inner_steps; ++k) {
    const ad::Tensor loss = objective(adapted, task, support, ForwardMode::train,
                                      pass_stream(cfg.seed, step, episode, task, k));
    const ParamSet scoped = adapted.filtered(keep);
    const GradSet g = grad(loss, scoped, create_graph);
    adapted = adapted.with_updates(param_axpy(scoped, g, cfg.inner_lr));
  }
  return adapted;
}

ad::Tensor meta_loss(const ParamSet& params, std::span<const Episode> episodes,
                     const TaskObjective& objective, const MetaConfig& cfg, std::int64_t step) {
  if (episodes.empty()) fail(ErrorKind::invalid_argument, "meta_loss needs at least one episode");
  ad::Tensor total;
  for (std::size_t i = 0; i < episodes.size(); ++i) {
    const Episode& e = episodes[i];
    const ParamSet adapted =
        inner_adapt(params, objective, e.task, e.support, cfg, !cfg.first_order, step, i);
    const ad::Tensor q = objective(adapted, e.task, e.query, ForwardMode::train,
                                   pass_stream(cfg.seed, step, i, e.task, kQueryPass));
    total = i == 0 ? q : ad::add(total, q);
  }
  return total;
}

OuterGradient meta_gradient(const ParamSet& params, std::span<const Episode> episodes,
                            const TaskObjective& objective, const MetaConfig& cfg,
                            std::int64_t step) {
  if (episodes.empty()) fail(ErrorKind::invalid_argument, "meta_gradient needs at least one episode");
  std::vector<GradSet> grads(episodes.size());
  std::vector<double> losses(episodes.size());
  parallel_for(episodes.size(), [&](std::size_t i) {
    const Episode& e = episodes[i];
    const ParamSet adapted =
        inner_adapt(params, objective, e.task, e.support, cfg, !cfg.first_order, step, i);
    const ad::Tensor q = objective(adapted, e.task, e.query, ForwardMode::train,
                                   pass_stream(cfg.seed, step, i, e.task, kQueryPass));
    grads[i] = grad(q, params, false);
    losses[i] = q.item();
  });
  return reduce(params, grads, losses);
}

OuterGradient joint_gradient(const ParamSet& params, std::span<const TaskBatch> batches,
                             const TaskObjective& objective, const MetaConfig& cfg,
                             std::int64_t step) {
  if (batches.empty()) fail(ErrorKind::invalid_argument, "joint step needs at least one batch");
  std::vector<GradSet> grads(batches.size());
  std::vector<double> losses(batches.size());
  parallel_for(batches.size(), [&](std::size_t i) {
    const TaskBatch& b = batches[i];
    const ad::Tensor loss = objective(params, b.task, b.examples, ForwardMode::train,
                                      pass_stream(cfg.seed, step, i, b.task, kQueryPass));
    grads[i] = grad(loss, params, false);
    losses[i] = loss.item();
  });
  return reduce(params, grads, losses);
}

StepResult maml_outer_step(const ParamSet& params, const AdamaxState& state,
                           std::span<const Episode> episodes, const TaskObjective& objective,
                           const MetaConfig& cfg, const ScheduleSpec& schedule,
                           std::int64_t step) {
  return apply_update(params, state, meta_gradient(params, episodes, objective, cfg, step), cfg,
                      schedule, step);
}

StepResult joint_multitask_step(const ParamSet& params, const AdamaxState& state,
                                std::span<const TaskBatch> batches,
                                const TaskObjective& objective, const MetaConfig& cfg,
                                const ScheduleSpec& schedule, std::int64_t step) {
  return apply_update(params, state, joint_gradient(params, batches, objective, cfg, step), cfg,
                      schedule, step);
}

std::vector<std::string> sample_task_batch(std::span<const std::string> tasks,
                                           std::span<const std::size_t> sizes, std::size_t n,
                                           const RngStream& stream) {
  if (tasks.empty()) fail(ErrorKind::invalid_argument, "sample_task_batch: empty task list");
  if (tasks.size() != sizes.size())
    fail(ErrorKind::invalid_argument, "sample_task_batch: tasks and sizes differ in length");
  if (n < 1) fail(ErrorKind::invalid_argument, "sample_task_batch: n must be >= 1");
  std::vector<std::uint64_t> cumulative(sizes.size());
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (sizes[i] == 0) fail(ErrorKind::invalid_argument, "sample_task_batch: task " + tasks[i] + " has size 0");
    total += sizes[i];
    cumulative[i] = total;
  }
  Rng rng = stream.engine();
  std::vector<std::string> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::uint64_t r = rng.below(total);
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), r);
    out.push_back(tasks[static_cast<std::size_t>(it - cumulative.begin())]);
  }
  return out;
}

Episode make_episode(const std::string& task, std::size_t train_size, std::size_t support_size,
                     std::size_t query_size, const RngStream& stream) {
  if (train_size == 0) fail(ErrorKind::data, "task " + task + " has an empty train split");
  if (query_size == 0) fail(ErrorKind::invalid_argument, "query size must be >= 1");
  std::size_t s = support_size, q = query_size;
  if (s + q > train_size) {
    s = train_size * support_size / (support_size + query_size);
    if (s == train_size) --s;
    q = train_size - s;
  }
  // Partial Fisher-Yates over the first s + q positions.
  std::vector<std::size_t> idx(train_size);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng = stream.engine();
  for (std::size_t i = 0; i < s + q; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(train_size - i));
    std::swap(idx[i], idx[j]);
  }
  Episode e;
  e.task = task;
  e.support.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(s));
  e.query.assign(idx.begin() + static_cast<std::ptrdiff_t>(s),
                 idx.begin() + static_cast<std::ptrdiff_t>(s + q));
  return e;
}

std::int64_t steps_per_epoch(const MetaConfig& cfg, std::span<const TaskInfo> tasks) {
  if (cfg.steps_per_epoch > 0) return cfg.steps_per_epoch;
  std::size_t total = 0;
  for (const auto& t : tasks) total += t.train_size;
  const std::size_t per_step = cfg.meta_batch * (cfg.support_size + cfg.query_size);
  return std::max<std::int64_t>(1, static_cast<std::int64_t>((total + per_step - 1) / per_step));
}

TrainResult train_loop(TrainMode mode, const ParamSet& init, std::span<const TaskInfo> tasks,
                       const TaskObjective& objective, const MetaConfig& cfg,
                       const TrainHooks& hooks) {
  cfg.validate();
  if (tasks.empty()) fail(ErrorKind::invalid_argument, "no training tasks");
  std::vector<std::string> ids;
  std::vector<std::size_t> sizes;
  for (const auto& t : tasks) {
    ids.push_back(t.id);
    sizes.push_back(t.train_size);
  }
  const std::int64_t spe = steps_per_epoch(cfg, tasks);
  const std::int64_t total = spe * cfg.epochs;

  TrainResult result;
  result.params = leaves(init);
  result.state = AdamaxState::fresh(result.params);
  if (total == 0) return result;
  const ScheduleSpec schedule{cfg.outer_lr, total, cfg.warmup_fraction};
  schedule.validate();

  const RngStream task_stream(cfg.seed, "task_sampler");
  const RngStream episode_stream(cfg.seed, "episodes");
  std::int64_t step = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::int64_t k = 0; k < spe; ++k, ++step) {
      const auto drawn = sample_task_batch(ids, sizes, cfg.meta_batch,
                                           task_stream.child(static_cast<std::uint64_t>(step)));
      std::vector<Episode> episodes;
      episodes.reserve(drawn.size());
      for (std::size_t i = 0; i < drawn.size(); ++i) {
        const auto pos = std::find(ids.begin(), ids.end(), drawn[i]) - ids.begin();
        episodes.push_back(make_episode(
            drawn[i], sizes[static_cast<std::size_t>(pos)], cfg.support_size, cfg.query_size,
            episode_stream.child(static_cast<std::uint64_t>(step)).child(i)));
      }
      StepResult r;
      if (mode == TrainMode::meta) {
        r = maml_outer_step(result.params, result.state, episodes, objective, cfg, schedule, step);
      } else {
        std::vector<TaskBatch> batches;
        batches.reserve(episodes.size());
        for (auto& e : episodes) batches.push_back({e.task, std::move(e.query)});
        r = joint_multitask_step(result.params, result.state, batches, objective, cfg, schedule,
                                 step);
      }
      if (!std::isfinite(r.loss) || !std::isfinite(r.grad_norm))
        fail(ErrorKind::numeric, "non-finite loss at outer step " + std::to_string(step + 1));
      result.params = std::move(r.params);
      result.state = std::move(r.state);
      result.steps = step + 1;
      if (hooks.on_step) hooks.on_step(step + 1, r);
    }
    if (hooks.on_epoch) hooks.on_epoch(epoch + 1, result.params, result.state);
  }
  return result;
}

FineTuneResult fine_tune(const ParamSet& params, const TaskObjective& objective,
                         const std::string& task, std::span<const std::size_t> train,
                         const FineTuneConfig& cfg,
                         const std::function<double(const ParamSet&)>& dev_metric,
                         const std::function<void(const FineTuneRecord&, const ParamSet&)>& on_epoch) {
  cfg.validate();
  FineTuneResult out;
  out.params = params;
  if (cfg.epochs == 0) return out;
  if (train.empty()) fail(ErrorKind::data, "fine_tune: empty train split for task " + task);

  const std::size_t n = train.size();
  const std::int64_t per_epoch = static_cast<std::int64_t>((n + cfg.batch_size - 1) / cfg.batch_size);
  std::int64_t total = per_epoch * cfg.epochs;
  if (cfg.max_steps > 0) total = std::min(total, cfg.max_steps);
  const ScheduleSpec schedule{cfg.lr, total, cfg.warmup_fraction};
  schedule.validate();

  ParamSet p = leaves(params);
  AdamaxState state = AdamaxState::fresh(p);
  const RngStream shuffle_stream(cfg.seed, "finetune_shuffle");
  const RngStream drop_stream(cfg.seed, "finetune_dropout");
  std::vector<std::size_t> order(train.begin(), train.end());
  std::int64_t step = 0;
  for (int epoch = 0; epoch < cfg.epochs && step < total; ++epoch) {
    Rng rng = shuffle_stream.child(static_cast<std::uint64_t>(epoch)).engine();
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    double loss_sum = 0;
    std::int64_t batches = 0;
    for (std::size_t start = 0; start < n && step < total; start += cfg.batch_size) {
      const std::span<const std::size_t> batch(order.data() + start,
                                               std::min(cfg.batch_size, n - start));
      const ad::Tensor loss = objective(p, task, batch, ForwardMode::train,
                                        drop_stream.child(static_cast<std::uint64_t>(step)));
      const double value = loss.item();
      if (!std::isfinite(value))
        fail(ErrorKind::numeric, "non-finite fine-tune loss at step " + std::to_string(step + 1));
      GradSet g = grad(loss, p, false);
      if (cfg.clip > 0) g = clip_by_global_norm(g, cfg.clip);
      const double lr = lr_at(step + 1, schedule);
      if (cfg.sgd) {
        p = sgd_step(p, g, lr).detached().as_parameters();
      } else {
        auto r = adamax_step(state, p, g, lr);
        p = std::move(r.params);
        state = std::move(r.state);
      }
      loss_sum += value;
      ++batches;
      ++step;
    }
    FineTuneRecord rec;
    rec.epoch = epoch + 1;
    rec.step = step;
    rec.train_loss = batches ? loss_sum / static_cast<double>(batches) : 0.0;
    rec.dev_metric = dev_metric ? dev_metric(p) : 0.0;
    out.history.push_back(rec);
    if (on_epoch) on_epoch(rec, p);
  }
  out.params = std::move(p);
  return out;
}

}  // namespace metaloop
