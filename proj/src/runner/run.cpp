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

#include "runner/run.hpp"

#include <charconv>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <thread>

#include <json.hpp>

#include "autodiff/rng.hpp"
#include "common/error.hpp"
#include "runner/tasks_data.hpp"
#include "tasks/objective.hpp"

namespace metaloop::runner {

namespace fs = std::filesystem;

std::string format_real(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string config_hash(const std::string& bytes, const std::string& override_key) {
  const std::uint64_t h = splitmix64(hash_string(bytes) ^ splitmix64(hash_string(override_key)));
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string make_run_id(const std::string& hash, std::chrono::system_clock::time_point start) {
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(start.time_since_epoch()).count();
  const std::time_t secs = static_cast<std::time_t>(ms / 1000);
  std::tm tm{};
  gmtime_r(&secs, &tm);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s-%04d%02d%02dT%02d%02d%02d.%03dZ", hash.c_str(), tm.tm_year + 1900,
                tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec, static_cast<int>(ms % 1000));
  return buf;
}

RunContext::RunContext(const RunConfig& cfg) : cfg_(cfg), start_(std::chrono::steady_clock::now()) {
  record_.key = config_hash(cfg.source_bytes, cfg.override_key);
  std::error_code ec;
  fs::create_directories(fs::path(cfg.output_dir), ec);
  // Back-to-back runs of one config can land in the same millisecond.
  for (int attempt = 0;; ++attempt) {
    record_.id = make_run_id(record_.key, std::chrono::system_clock::now());
    record_.dir = (fs::path(cfg.output_dir) / record_.id).string();
    if (fs::create_directory(record_.dir, ec)) break;
    if (ec || attempt == 50)
      fail(ErrorKind::io, "cannot create run directory " + record_.dir + (ec ? ": " + ec.message() : " (exists)"));
    std::this_thread::sleep_for(std::chrono::milliseconds(1));
  }
  fs::create_directories(fs::path(record_.dir) / "checkpoints");
  record_.config_copy = path("config.json");
  {
    std::ofstream out(record_.config_copy, std::ios::binary);
    out << cfg.source_bytes;
    if (!out) fail(ErrorKind::io, "cannot write " + record_.config_copy);
  }
  record_.metrics = path("metrics.jsonl");
  log_ = MetricLog(record_.metrics);
  write_summary();
}

std::string RunContext::path(const std::string& name) const { return (fs::path(record_.dir) / name).string(); }

void RunContext::log(std::int64_t step, const std::string& task, const std::string& split,
                     const std::string& metric, double value, std::optional<double> fraction,
                     std::optional<std::uint64_t> seed) {
  MetricRecord r;
  r.run = record_.key;
  r.step = step;
  r.task = task;
  r.split = split;
  r.metric = metric;
  r.value = value;
  r.fraction = fraction;
  r.seed = seed;
  if (cfg_.log_wall_time)
    r.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  log_.append(r);
}

std::string RunContext::checkpoint(const std::string& name, const ParamSet& params, const AdamaxState* state) {
  const std::string p = (fs::path(record_.dir) / "checkpoints" / (name + ".mlps")).string();
  save_checkpoint(p, params, state);
  if (std::find(record_.checkpoints.begin(), record_.checkpoints.end(), p) == record_.checkpoints.end())
    record_.checkpoints.push_back(p);
  write_summary();
  return p;
}

void RunContext::finish(const std::string& status) {
  record_.status = status;
  write_summary();
}

void RunContext::write_summary() const {
  nlohmann::ordered_json j;
  j["id"] = record_.id;
  j["config_hash"] = record_.key;
  j["mode"] = mode_name(cfg_.mode);
  j["seed"] = cfg_.seed;
  j["overrides"] = cfg_.override_key;
  j["source_config"] = cfg_.source_path;
  j["config"] = record_.config_copy;
  j["metrics"] = record_.metrics;
  j["checkpoints"] = record_.checkpoints;
  j["status"] = record_.status;
  const std::string tmp = path("run.json.tmp");
  {
    std::ofstream out(tmp, std::ios::binary);
    out << j.dump(2) << '\n';
  }
  fs::rename(tmp, path("run.json"));
}

ParamSet overlay_checkpoint(const ParamSet& fresh, const ParamSet& checkpoint, const std::string& field) {
  std::vector<NamedTensor> updates;
  for (const auto& e : fresh.entries()) {
    if (!checkpoint.contains(e.name)) continue;
    const ad::Tensor& v = checkpoint.at(e.name);
    if (v.shape() != e.value.shape())
      fail(ErrorKind::config, "config field '" + field + "': checkpoint parameter '" + e.name + "' has shape " +
                                  ad::shape_string(v.shape()) + ", model expects " +
                                  ad::shape_string(e.value.shape()));
    updates.push_back({e.name, ad::Tensor::parameter(v.shape(), v.values())});
  }
  if (updates.empty())
    fail(ErrorKind::config, "config field '" + field + "': checkpoint shares no parameters with the model");
  return fresh.with_updates(ParamSet(std::move(updates)));
}

void require_mode(const RunConfig& cfg, const std::vector<RunMode>& allowed, const std::string& verb) {
  for (RunMode m : allowed)
    if (cfg.mode == m) return;
  std::string names;
  for (RunMode m : allowed) names += (names.empty() ? "" : ", ") + mode_name(m);
  fail(ErrorKind::config, "config field 'mode': verb '" + verb + "' runs modes " + names + ", not " +
                              mode_name(cfg.mode));
}

namespace {

// Mean of the per-task dev metrics, oriented so larger is better.
double dev_score(const std::vector<std::pair<Metric, double>>& metrics) {
  double s = 0;
  for (const auto& [m, v] : metrics) s += higher_is_better(m) ? v : -v;
  return s / static_cast<double>(metrics.size());
}

std::vector<std::size_t> all_indices(std::size_t n) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  return idx;
}

std::vector<std::size_t> dev_support(const RunConfig& cfg, const std::string& task, std::size_t n) {
  std::vector<std::size_t> idx = all_indices(n);
  Rng rng = RngStream(cfg.seed, "dev_support").child(task).engine();
  const std::size_t k = std::min(cfg.meta.support_size, n);
  for (std::size_t i = 0; i < k; ++i) std::swap(idx[i], idx[i + rng.below(n - i)]);
  idx.resize(k);
  return idx;
}

void run_multitask(const RunConfig& cfg, RunContext& run) {
  const TaskData data = prepare_task_data(cfg, nullptr);
  if (data.vocab) data.vocab->save(run.path("vocab.txt"));
  const TaskObjective objective = supervised_objective(data.assembly, data.table);
  const ParamSet init = init_params(data.assembly, cfg.seed);
  const bool meta_mode = cfg.mode == RunMode::meta;

  double loss_sum = 0;
  std::int64_t loss_count = 0, last_step = 0;
  BestTracker best;
  TrainHooks hooks;
  hooks.on_step = [&](std::int64_t step, const StepResult& r) {
    loss_sum += r.loss;
    ++loss_count;
    last_step = step;
  };
  hooks.on_epoch = [&](int epoch, const ParamSet& params, const AdamaxState& state) {
    run.log(last_step, "*", "train", meta_mode ? "meta_loss" : "loss",
            loss_count ? loss_sum / static_cast<double>(loss_count) : 0.0);
    loss_sum = 0;
    loss_count = 0;
    std::vector<std::pair<Metric, double>> devs;
    for (const auto& [id, task] : *data.table) {
      if (task.dev.size() == 0) continue;
      ParamSet p = params;
      // A meta-learned initialization is judged after adapting on a support batch.
      if (meta_mode && cfg.meta.inner_steps > 0)
        p = inner_adapt(params, objective, id, dev_support(cfg, id, task.train.size()), cfg.meta, false);
      const double m = evaluate(data.assembly, p, task, task.dev);
      run.log(last_step, id, "dev", metric_name(task.metric), m);
      devs.emplace_back(task.metric, m);
    }
    char name[32];
    std::snprintf(name, sizeof name, "epoch_%03d", epoch);
    run.checkpoint(name, params, &state);
    if (!devs.empty() && best.offer(dev_score(devs))) run.checkpoint("best", params, &state);
  };
  const TrainResult result = train_loop(meta_mode ? TrainMode::meta : TrainMode::joint, init, data.infos,
                                        objective, cfg.meta, hooks);
  run.checkpoint("final", result.params, &result.state);
}

void run_finetune(const RunConfig& cfg, RunContext& run) {
  const TaskData data = prepare_task_data(cfg, nullptr);
  if (data.vocab) data.vocab->save(run.path("vocab.txt"));
  const auto it = data.table->find(cfg.finetune_task);
  if (it == data.table->end())
    fail(ErrorKind::config, "config field 'finetune.task': no task '" + cfg.finetune_task + "' in the data");
  const EncodedTask& task = it->second;
  ParamSet init = init_params(data.assembly, cfg.seed);
  if (cfg.finetune_init) init = overlay_checkpoint(init, load_checkpoint(*cfg.finetune_init).params, "finetune.init");
  const TaskObjective objective = supervised_objective(data.assembly, data.table);
  const bool has_dev = task.dev.size() > 0;
  BestTracker best;
  std::function<double(const ParamSet&)> dev;
  if (has_dev) dev = [&](const ParamSet& p) { return evaluate(data.assembly, p, task, task.dev); };
  const auto on_epoch = [&](const FineTuneRecord& rec, const ParamSet& params) {
    run.log(rec.step, task.id, "train", "loss", rec.train_loss);
    if (has_dev) run.log(rec.step, task.id, "dev", metric_name(task.metric), rec.dev_metric);
    char name[32];
    std::snprintf(name, sizeof name, "epoch_%03d", rec.epoch);
    run.checkpoint(name, params);
    if (has_dev && best.offer(higher_is_better(task.metric) ? rec.dev_metric : -rec.dev_metric))
      run.checkpoint("best", params);
  };
  const FineTuneResult result =
      fine_tune(init, objective, task.id, all_indices(task.train.size()), cfg.finetune, dev, on_epoch);
  run.checkpoint("final", result.params);
}

template <typename Body>
RunRecord with_run(const RunConfig& cfg, Body body) {
  RunContext run(cfg);
  try {
    body(run);
  } catch (const Error& e) {
    run.finish(e.kind() == ErrorKind::numeric ? std::string("aborted: ") + e.what()
                                              : std::string("failed: ") + e.what());
    throw;
  } catch (const std::exception& e) {
    run.finish(std::string("failed: ") + e.what());
    throw;
  }
  run.finish("completed");
  return run.record();
}

}  // namespace

RunRecord run_in_context(const RunConfig& cfg, const std::function<void(RunContext&)>& body) {
  return with_run(cfg, body);
}

RunRecord cmd_train(const RunConfig& cfg) {
  require_mode(cfg, {RunMode::meta, RunMode::joint, RunMode::finetune}, "train");
  return with_run(cfg, [&](RunContext& run) {
    if (cfg.mode == RunMode::finetune) run_finetune(cfg, run);
    else run_multitask(cfg, run);
  });
}

RunRecord cmd_adapt_sweep(const RunConfig& cfg) {
  require_mode(cfg, {RunMode::adapt_sweep}, "adapt-sweep");
  return with_run(cfg, [&](RunContext& run) {
    std::optional<Vocab> vocab;
    if (cfg.sweep.vocab) vocab = Vocab::load(*cfg.sweep.vocab);
    else if (cfg.sweep.checkpoint) vocab = find_vocab_near(*cfg.sweep.checkpoint);
    std::optional<ParamSet> ckpt;
    if (!cfg.sweep.random_init) ckpt = load_checkpoint(*cfg.sweep.checkpoint).params;

    const std::vector<TaskDataset> datasets = load_task_datasets(cfg);
    const TaskDataset* source = nullptr;
    for (const auto& d : datasets)
      if (d.id == cfg.sweep.task) source = &d;
    if (!source) fail(ErrorKind::config, "config field 'sweep.task': no task '" + cfg.sweep.task + "' in the data");
    if (source->dev.empty()) fail(ErrorKind::data, "sweep task " + source->id + " has no dev split");
    const InputMode input = choose_input(cfg, datasets);
    if (input == InputMode::token_sequence && !vocab) vocab = build_vocab(cfg, std::vector<TaskDataset>{*source});
    if (vocab) vocab->save(run.path("vocab.txt"));

    std::ofstream csv(run.path("sweep.csv"), std::ios::binary);
    csv << "fraction,n_train,metric,seed\n";
    for (double fraction : cfg.sweep.fractions) {
      for (std::uint64_t seed : cfg.sweep.seeds) {
        const TaskDataset sub = subsample(*source, fraction, seed);
        const TaskData data = prepare_task_data(cfg, vocab ? &*vocab : nullptr, std::vector<TaskDataset>{sub});
        const EncodedTask& task = data.table->at(sub.id);
        ParamSet init = init_params(data.assembly, seed);
        if (ckpt) init = overlay_checkpoint(init, *ckpt, "sweep.checkpoint");
        FineTuneConfig ft = cfg.finetune;
        ft.seed = seed;
        const auto result = fine_tune(init, supervised_objective(data.assembly, data.table), task.id,
                                      all_indices(task.train.size()), ft);
        const double metric = evaluate(data.assembly, result.params, task, task.dev);
        run.log(static_cast<std::int64_t>(sub.train.size()), task.id, "dev", metric_name(task.metric), metric,
                fraction, seed);
        csv << format_real(fraction) << ',' << sub.train.size() << ',' << format_real(metric) << ',' << seed << '\n';
        csv.flush();
      }
    }
    if (!csv) fail(ErrorKind::io, "write failed on " + run.path("sweep.csv"));
  });
}

}  // namespace metaloop::runner
