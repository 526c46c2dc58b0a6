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

#ifndef METALOOP_RUNNER_RUN_HPP
#define METALOOP_RUNNER_RUN_HPP

#include <chrono>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "optim/optim.hpp"
#include "runner/config.hpp"
#include "runner/metric_log.hpp"

namespace metaloop::runner {

struct RunRecord {
  std::string id;   // <config hash>-<UTC start time>
  std::string key;  // config hash alone; written into every metric record
  std::string dir;
  std::string config_copy;
  std::string metrics;
  std::vector<std::string> checkpoints;
  std::string status = "running";
};

/// Hex FNV-style hash over the config bytes and command-line overrides.
std::string config_hash(const std::string& bytes, const std::string& override_key);
std::string make_run_id(const std::string& hash, std::chrono::system_clock::time_point start);

/// Owns one run directory: frozen config, metric log, checkpoints, run.json.
class RunContext {
 public:
  explicit RunContext(const RunConfig& cfg);

  const RunRecord& record() const { return record_; }
  std::string path(const std::string& name) const;

  void log(std::int64_t step, const std::string& task, const std::string& split,
           const std::string& metric, double value, std::optional<double> fraction = std::nullopt,
           std::optional<std::uint64_t> seed = std::nullopt);
  std::string checkpoint(const std::string& name, const ParamSet& params,
                         const AdamaxState* state = nullptr);
  void finish(const std::string& status);

 private:
  void write_summary() const;

  const RunConfig& cfg_;
  RunRecord record_;
  MetricLog log_;
  std::chrono::steady_clock::time_point start_;
};

/// Tracks the best dev score seen and writes best.mlps when it improves.
class BestTracker {
 public:
  bool offer(double score) {
    if (best_ && score <= *best_) return false;
    best_ = score;
    return true;
  }

 private:
  std::optional<double> best_;
};

/// Copies every checkpoint entry whose name exists in `fresh`; shapes must match.
ParamSet overlay_checkpoint(const ParamSet& fresh, const ParamSet& checkpoint, const std::string& field);

/// Creates the run, runs `body`, and records completed / aborted / failed.
RunRecord run_in_context(const RunConfig& cfg, const std::function<void(RunContext&)>& body);

void require_mode(const RunConfig& cfg, const std::vector<RunMode>& allowed, const std::string& verb);

RunRecord cmd_train(const RunConfig& cfg);
RunRecord cmd_adapt_sweep(const RunConfig& cfg);

struct StockPrepSummary {
  std::string cache_dir;
  bool reused = false;
  std::vector<std::pair<std::string, std::size_t>> windows;  // per symbol
};
StockPrepSummary cmd_stock_prep(const RunConfig& cfg);
RunRecord cmd_stock_train(const RunConfig& cfg);
RunRecord cmd_baseline(const RunConfig& cfg);

/// Plot-data CSVs for the given runs (directories, or ids under runs_root).
std::vector<std::string> cmd_report(const std::vector<std::string>& runs, const std::string& runs_root,
                                    const std::string& out_dir);

std::string format_real(double v);

}  // namespace metaloop::runner

#endif  // METALOOP_RUNNER_RUN_HPP
