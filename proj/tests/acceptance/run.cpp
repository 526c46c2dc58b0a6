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

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <unistd.h>

#include "criteria.hpp"
#include "runner/config.hpp"
#include "runner/run.hpp"

namespace metaloop::acceptance {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace metaloop::runner;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json text_data() {
  return {{"generator",
           {{"family", "text"}, {"tasks", 4}, {"examples", 120}, {"dev_examples", 40}, {"vocab_size", 120}, {"seed", 21}}},
          {"max_seq_len", 16}};
}

json text_model() {
  return {{"encoder", "mlp"}, {"hidden", 16}, {"layers", 1}, {"head_dropout", 0.1}, {"shared_head", true}};
}

json meta_section() {
  return {{"inner_lr", 0.2}, {"outer_lr", 0.01}, {"inner_steps", 2}, {"meta_batch", 4}, {"support_size", 6},
          {"query_size", 8}, {"epochs", 2}, {"steps_per_epoch", 5}};
}

json stock_section() {
  return {{"source", {{"synthetic", {{"stocks", 4}, {"days", 90}, {"seed", 31}}}}},
          {"held_out", {"S3"}},
          {"lag", 4},
          {"model", {{"encoder", "mlp"}, {"hidden", 8}, {"day_dim", 8}, {"rnn_hidden", 8}, {"dropout", 0.1}}},
          {"adapt_steps", 3},
          {"adapt_windows", 10}};
}

struct Case {
  std::string name;
  json config;
  RunRecord (*verb)(const RunConfig&);
  std::vector<std::string> artifacts;  // extra files compared byte for byte
};

// Runs `c` twice, under 1 and then 4 workers. The config bytes, output_dir
// included, are the same both times; the two runs get distinct directories.
bool repeat_matches(const Case& c, const fs::path& root, std::string& why) {
  std::string logs[2];
  std::vector<std::string> extra[2];
  const char* threads[2] = {"1", "4"};
  json j = c.config;
  j["output_dir"] = (root / c.name).string();
  const std::string bytes = j.dump(2);
  std::string dirs[2];
  for (int i = 0; i < 2; ++i) {
    ::setenv("METALOOP_THREADS", threads[i], 1);
    const RunRecord r = c.verb(parse_config(bytes, "", {}));
    dirs[i] = r.dir;
    logs[i] = slurp(r.metrics);
    for (const auto& a : c.artifacts) extra[i].push_back(slurp(fs::path(r.dir) / a));
  }
  ::unsetenv("METALOOP_THREADS");
  if (dirs[0] == dirs[1]) {
    why = c.name + " reused a run directory";
    return false;
  }
  if (logs[0].empty()) {
    why = c.name + " wrote an empty metric log";
    return false;
  }
  if (logs[0] != logs[1]) {
    why = c.name + " metric logs differ";
    return false;
  }
  for (std::size_t k = 0; k < c.artifacts.size(); ++k) {
    if (extra[0][k].empty() || extra[0][k] != extra[1][k]) {
      why = c.name + " " + c.artifacts[k] + " differs or is empty";
      return false;
    }
  }
  return true;
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / ("metaloop_accept_a10_" + std::to_string(::getpid()));
  fs::remove_all(root);

  std::vector<Case> cases;
  json meta{{"mode", "meta"}, {"seed", 17}, {"data", text_data()}, {"model", text_model()}, {"meta", meta_section()}};
  cases.push_back({"meta", meta, cmd_train, {"checkpoints/final.mlps", "checkpoints/best.mlps"}});
  json joint = meta;
  joint["mode"] = "joint";
  cases.push_back({"joint", joint, cmd_train, {"checkpoints/final.mlps"}});
  json fomaml = meta;
  fomaml["meta"]["first_order"] = true;
  cases.push_back({"fomaml", fomaml, cmd_train, {"checkpoints/final.mlps"}});
  json sin{{"mode", "meta"},
           {"seed", 5},
           {"data", {{"generator", {{"family", "sinusoid"}, {"tasks", 8}, {"examples", 20}, {"dev_examples", 10}, {"seed", 3}}}}},
           {"model", {{"encoder", "mlp"}, {"hidden", 16}, {"layers", 2}, {"head_dropout", 0.1}}},
           {"meta", meta_section()}};
  cases.push_back({"sinusoid", sin, cmd_train, {"checkpoints/final.mlps"}});

  // Finetune and sweep start from the meta run's checkpoint.
  json seed_run = meta;
  seed_run["output_dir"] = (root / "seed_run").string();
  const RunRecord base = cmd_train(parse_config(seed_run.dump(2), "", {}));
  const std::string ckpt = base.dir + "/checkpoints/final.mlps";

  json ft = meta;
  ft["mode"] = "finetune";
  ft["finetune"] = {{"task", "text2"}, {"init", ckpt}, {"epochs", 2}, {"batch_size", 8}, {"lr", 0.01}};
  cases.push_back({"finetune", ft, cmd_train, {"checkpoints/final.mlps"}});
  json sweep = meta;
  sweep["mode"] = "adapt_sweep";
  sweep["finetune"] = {{"epochs", 2}, {"batch_size", 8}, {"optimizer", "sgd"}, {"lr", 0.2}};
  sweep["sweep"] = {{"task", "text1"}, {"checkpoint", ckpt}, {"fractions", {0.1, 0.5, 1.0}}, {"seeds", {1, 2}}};
  cases.push_back({"adapt_sweep", sweep, cmd_adapt_sweep, {"sweep.csv"}});

  json stock{{"mode", "stock_meta"}, {"seed", 9}, {"stock", stock_section()}, {"meta", meta_section()}};
  stock["meta"]["support_size"] = 4;
  stock["meta"]["query_size"] = 4;
  stock["meta"]["meta_batch"] = 3;
  cases.push_back({"stock_meta", stock, cmd_stock_train, {"checkpoints/final.mlps"}});
  json stock_joint = stock;
  stock_joint["stock"]["train_mode"] = "joint";
  cases.push_back({"stock_joint", stock_joint, cmd_stock_train, {"checkpoints/final.mlps"}});
  json baseline{{"mode", "stock_baseline"}, {"seed", 9}, {"stock", stock_section()}};
  cases.push_back({"stock_baseline", baseline, cmd_baseline, {"baselines.csv"}});

  std::string why;
  for (const auto& c : cases) {
    if (!repeat_matches(c, root, why)) return {false, why};
  }
  fs::remove_all(root);
  return {true, std::to_string(cases.size()) + " run kinds repeated under 1 and 4 workers, logs byte-identical"};
}

}  // namespace

std::vector<Criterion> run_criteria() {
  return {{"A10", "identical config and seed give byte-identical metric logs", 600, determinism}};
}

}  // namespace metaloop::acceptance
