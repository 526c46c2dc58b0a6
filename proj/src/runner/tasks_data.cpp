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

#include "runner/tasks_data.hpp"

#include <filesystem>
#include <iostream>
#include <set>

#include "common/error.hpp"
#include "tasks/generators.hpp"

namespace metaloop::runner {

namespace fs = std::filesystem;

namespace {

void prefix_ids(TaskDataset& ds, const std::string& prefix) {
  if (prefix.empty()) return;
  ds.id = prefix + ds.id;
  for (auto* part : {&ds.train, &ds.dev, &ds.test})
    for (auto& e : *part) e.id = prefix + e.id;
}

}  // namespace

std::vector<TaskDataset> load_task_datasets(const RunConfig& cfg) {
  std::vector<TaskDataset> all;
  if (cfg.data.manifest) {
    ManifestLoad load = load_manifest(*cfg.data.manifest, cfg.skip_bad);
    for (const auto& [file, err] : load.skipped)
      std::cerr << "warning: skipped " << file << ":" << err.line << ": " << err.message << "\n";
    all = std::move(load.tasks);
  } else if (cfg.data.generator) {
    const GeneratorConfig& g = *cfg.data.generator;
    if (g.family == "sinusoid") all = gen_sinusoid_family(g.tasks, g.examples, g.seed, g.dev_examples);
    else all = gen_text_cls_family(g.tasks, g.vocab_size, g.examples, g.seed, g.text);
    for (auto& ds : all) prefix_ids(ds, g.prefix);
  } else {
    fail(ErrorKind::config, "config field 'data': no manifest or generator given");
  }
  if (cfg.data.tasks.empty()) return all;
  std::vector<TaskDataset> picked;
  for (const auto& id : cfg.data.tasks) {
    const auto it = std::find_if(all.begin(), all.end(), [&](const TaskDataset& d) { return d.id == id; });
    if (it == all.end()) fail(ErrorKind::config, "config field 'data.tasks': no task '" + id + "' in the data");
    picked.push_back(*it);
  }
  return picked;
}

InputMode choose_input(const RunConfig& cfg, const std::vector<TaskDataset>& datasets) {
  if (cfg.model.input == InputChoice::tokens) return InputMode::token_sequence;
  if (cfg.model.input == InputChoice::features) return InputMode::feature_vector;
  if (datasets.empty() || datasets[0].train.empty()) return InputMode::token_sequence;
  const Example& e = datasets[0].train[0];
  return e.text_a.empty() && !e.features.empty() ? InputMode::feature_vector : InputMode::token_sequence;
}

Vocab build_vocab(const RunConfig& cfg, const std::vector<TaskDataset>& datasets) {
  std::vector<std::string> texts;
  for (const auto& ds : datasets)
    for (const auto& e : ds.train) {
      texts.push_back(e.text_a);
      if (e.text_b) texts.push_back(*e.text_b);
    }
  return Vocab::build(texts, cfg.data.vocab_size, cfg.data.min_count);
}

ModelAssembly build_assembly(const RunConfig& cfg, const std::vector<TaskDataset>& datasets, InputMode input,
                             std::size_t vocab_size) {
  if (datasets.empty()) fail(ErrorKind::data, "no tasks to train on");
  ModelAssembly a;
  EncoderSpec& e = a.encoder;
  e.kind = cfg.model.encoder;
  e.input = input;
  e.hidden = cfg.model.hidden;
  e.layers = cfg.model.layers;
  e.heads = cfg.model.heads;
  e.ffn_multiplier = cfg.model.ffn_multiplier;
  e.max_seq_len = cfg.data.max_seq_len;
  e.vocab_size = vocab_size;
  if (input == InputMode::feature_vector) {
    const auto& first = datasets[0].train.at(0);
    e.input_dim = first.features.size();
    if (e.input_dim == 0) fail(ErrorKind::data, "task " + datasets[0].id + " has no feature columns");
    if (e.kind == EncoderKind::transformer)
      fail(ErrorKind::config, "config field 'model.encoder': feature inputs need the mlp encoder");
  }
  if (cfg.model.shared_head) {
    const HeadSpec head = datasets[0].head_spec(cfg.model.head_dropout);
    for (const auto& ds : datasets) {
      const HeadSpec h = ds.head_spec(cfg.model.head_dropout);
      if (h.kind != head.kind || h.output_dim() != head.output_dim())
        fail(ErrorKind::config, "config field 'model.shared_head': task " + ds.id +
                                    " has a different head shape than " + datasets[0].id);
      a.head_alias[ds.id] = "shared";
    }
    a.heads["shared"] = head;
  } else {
    for (const auto& ds : datasets) a.heads[ds.id] = ds.head_spec(cfg.model.head_dropout);
  }
  try {
    a.validate();
  } catch (const Error& err) {
    fail(ErrorKind::config, std::string("config field 'model': ") + err.what());
  }
  return a;
}

TaskData prepare_task_data(const RunConfig& cfg, const Vocab* vocab,
                           std::optional<std::vector<TaskDataset>> datasets) {
  TaskData d;
  d.datasets = datasets ? std::move(*datasets) : load_task_datasets(cfg);
  if (d.datasets.empty()) fail(ErrorKind::data, "no tasks loaded");
  std::set<std::string> ids;
  for (const auto& ds : d.datasets) {
    ds.validate();
    if (!ids.insert(ds.id).second) fail(ErrorKind::data, "task id '" + ds.id + "' appears twice");
  }
  d.input = choose_input(cfg, d.datasets);
  if (d.input == InputMode::token_sequence) d.vocab = vocab ? *vocab : build_vocab(cfg, d.datasets);
  d.assembly = build_assembly(cfg, d.datasets, d.input, d.vocab ? d.vocab->size() : 0);
  d.table = std::make_shared<TaskTable>();
  for (const auto& ds : d.datasets) {
    (*d.table)[ds.id] = encode_task(ds, d.input, d.vocab ? &*d.vocab : nullptr, cfg.data.max_seq_len);
    d.infos.push_back({ds.id, ds.train.size()});
  }
  return d;
}

std::optional<Vocab> find_vocab_near(const std::string& checkpoint) {
  const fs::path dir = fs::path(checkpoint).parent_path();
  for (const fs::path& candidate : {dir / "vocab.txt", dir.parent_path() / "vocab.txt"}) {
    if (fs::is_regular_file(candidate)) return Vocab::load(candidate.string());
  }
  return std::nullopt;
}

}  // namespace metaloop::runner
