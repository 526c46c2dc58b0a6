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

#ifndef METALOOP_TASKS_DATASET_HPP
#define METALOOP_TASKS_DATASET_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "models/model.hpp"

namespace metaloop {

enum class Metric { accuracy, matthews, pearson, mse };

Metric parse_metric(const std::string& name);
std::string metric_name(Metric m);
/// Pearson and accuracy-like metrics improve upwards; mse downwards.
bool higher_is_better(Metric m);

struct Example {
  std::string id;
  std::string text_a;
  std::optional<std::string> text_b;
  std::vector<double> features;
  int label = 0;       // classification
  double target = 0;   // regression
};

enum class Split { train, dev, test };

struct TaskDataset {
  std::string id;
  HeadKind head = HeadKind::classification;
  std::size_t num_classes = 2;
  Metric metric = Metric::accuracy;
  std::vector<Example> train;
  std::vector<Example> dev;
  std::vector<Example> test;
  // Free-form numeric facts, e.g. a generator's hidden parameters.
  std::map<std::string, double> metadata;
  std::optional<double> dropout;

  const std::vector<Example>& split(Split s) const;
  /// Train non-empty, ids disjoint across splits, labels in range.
  void validate() const;
  HeadSpec head_spec(double default_dropout = 0.1) const;
};

enum class FileFormat { jsonl, csv, tsv };
FileFormat parse_format(const std::string& name);

/// Source column for each field. An empty id column numbers rows instead.
/// text_b is optional per row (JSONL) or per file (CSV/TSV header). `label_names`, when
/// given, maps label strings to class indices by position.
struct SchemaMapping {
  std::string id = "id";
  std::string text_a = "text_a";
  std::string text_b = "text_b";
  std::string label = "label";
  std::vector<std::string> features;
  std::vector<std::string> label_names;
  char delimiter = 0;  // 0 = ',' for csv, '\t' for tsv
};

struct RowError {
  std::size_t line = 0;
  std::string message;
};

struct LoadReport {
  std::vector<Example> examples;
  std::vector<RowError> errors;
};

/// Parses every row, collecting per-row problems. Structural problems
/// (missing file, empty file, missing header column) throw.
LoadReport read_examples(const std::string& path, FileFormat format, const SchemaMapping& schema,
                         HeadKind head, std::size_t num_classes);

/// read_examples, then throws ErrorKind::data listing the bad rows unless
/// skip_bad, in which case bad rows are dropped.
std::vector<Example> load_examples(const std::string& path, FileFormat format,
                                   const SchemaMapping& schema, HeadKind head,
                                   std::size_t num_classes, bool skip_bad,
                                   std::vector<RowError>* skipped = nullptr);

/// One {id, text_a, text_b?, features?, label} object per line.
void write_jsonl(const std::string& path, const std::vector<Example>& examples, HeadKind head);

// Manifest layout:
//
//   {"tasks": [{"id": "sst", "head": "classification", "num_classes": 2,
//               "metric": "accuracy", "format": "tsv",
//               "columns": {"id": "id", "text_a": "sentence", "label": "label"},
//               "label_names": ["neg", "pos"], "dropout": 0.05,
//               "splits": {"train": "sst/train.tsv", "dev": "sst/dev.tsv"}}]}
//
// Split paths are relative to the manifest's directory.
struct ManifestLoad {
  std::vector<TaskDataset> tasks;
  std::vector<std::pair<std::string, RowError>> skipped;  // (file, error)
};

ManifestLoad load_manifest(const std::string& path, bool skip_bad);

/// Train split replaced by floor(fraction * N) examples (at least one),
/// drawn without replacement; kept in original order.
TaskDataset subsample(const TaskDataset& dataset, double fraction, std::uint64_t seed);

}  // namespace metaloop

#endif  // METALOOP_TASKS_DATASET_HPP
