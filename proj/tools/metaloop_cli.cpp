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

// metaloop command-line driver. Talks to the library only through the C API.

#include <CLI11.hpp>

#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "metaloop/metaloop.h"

namespace {

struct ConfigFlags {
  std::string config;
  std::optional<uint64_t> seed;
  std::string out;
  bool skip_bad = false;
};

int report_error(ml_status s) {
  std::fprintf(stderr, "metaloop: %s: %s\n", ml_status_name(s), ml_last_error());
  return static_cast<int>(s);
}

void add_config_flags(CLI::App* cmd, ConfigFlags& f) {
  cmd->add_option("--config", f.config, "JSON run config")->required()->check(CLI::ExistingFile);
  cmd->add_option("--seed", f.seed, "override the config seed");
  cmd->add_option("--out", f.out, "override the output directory");
  cmd->add_flag("--skip-bad", f.skip_bad, "skip malformed data rows with a warning");
}

int load(const ConfigFlags& f, ml_config** cfg) {
  ml_options opts{};
  opts.has_seed = f.seed.has_value();
  opts.seed = f.seed.value_or(0);
  opts.output_dir = f.out.empty() ? nullptr : f.out.c_str();
  opts.skip_bad = f.skip_bad;
  const ml_status s = ml_config_load(f.config.c_str(), &opts, cfg);
  return s == ML_OK ? 0 : report_error(s);
}

int run_verb(const ConfigFlags& f, ml_status (*verb)(const ml_config*, ml_run**)) {
  ml_config* cfg = nullptr;
  if (int rc = load(f, &cfg)) return rc;
  ml_run* run = nullptr;
  const ml_status s = verb(cfg, &run);
  ml_config_free(cfg);
  if (s != ML_OK) return report_error(s);
  std::printf("run %s\n", ml_run_id(run));
  std::printf("dir %s\n", ml_run_dir(run));
  std::printf("status %s\n", ml_run_status(run));
  ml_run_free(run);
  return 0;
}

int print_strings(ml_status s, ml_strings* lines) {
  if (s != ML_OK) return report_error(s);
  for (size_t i = 0; i < ml_strings_count(lines); ++i) std::printf("%s\n", ml_strings_at(lines, i));
  ml_strings_free(lines);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"metaloop: meta-learning with fast adaptation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", ml_version());

  ConfigFlags train_f, sweep_f, prep_f, stock_f, base_f;
  auto* train = app.add_subcommand("train", "meta, joint or finetune training");
  add_config_flags(train, train_f);
  auto* sweep = app.add_subcommand("adapt-sweep", "fine-tune on growing fractions of a held-out task");
  add_config_flags(sweep, sweep_f);
  auto* prep = app.add_subcommand("stock-prep", "align, window and cache stock data");
  add_config_flags(prep, prep_f);
  auto* stock = app.add_subcommand("stock-train", "meta-train the stock model, adapt to held-out stocks");
  add_config_flags(stock, stock_f);
  auto* base = app.add_subcommand("baseline", "RAND, AR and scratch baselines on held-out stocks");
  add_config_flags(base, base_f);

  std::vector<std::string> report_runs;
  std::string report_root = "runs", report_out = "report";
  auto* report = app.add_subcommand("report", "plot-data CSVs from finished runs");
  report->add_option("runs", report_runs, "run directories or run ids")->required();
  report->add_option("--root", report_root, "directory holding run ids");
  report->add_option("--out", report_out, "directory for the CSVs");

  CLI11_PARSE(app, argc, argv);

  if (*train) return run_verb(train_f, ml_train);
  if (*sweep) return run_verb(sweep_f, ml_adapt_sweep);
  if (*stock) return run_verb(stock_f, ml_stock_train);
  if (*base) return run_verb(base_f, ml_baseline);
  if (*prep) {
    ml_config* cfg = nullptr;
    if (int rc = load(prep_f, &cfg)) return rc;
    ml_strings* lines = nullptr;
    const ml_status s = ml_stock_prep(cfg, &lines);
    ml_config_free(cfg);
    return print_strings(s, lines);
  }
  std::vector<const char*> refs;
  for (const auto& r : report_runs) refs.push_back(r.c_str());
  ml_strings* files = nullptr;
  const ml_status s = ml_report(refs.data(), refs.size(), report_root.c_str(), report_out.c_str(), &files);
  return print_strings(s, files);
}
