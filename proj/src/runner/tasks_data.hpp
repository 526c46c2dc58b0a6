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

#ifndef METALOOP_RUNNER_TASKS_DATA_HPP
#define METALOOP_RUNNER_TASKS_DATA_HPP

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "runner/config.hpp"
#include "tasks/dataset.hpp"
#include "tasks/objective.hpp"
#include "tasks/text.hpp"

namespace metaloop::runner {

struct TaskData {
  std::vector<TaskDataset> datasets;
  InputMode input = InputMode::token_sequence;
  std::optional<Vocab> vocab;
  ModelAssembly assembly;
  std::shared_ptr<TaskTable> table;
  std::vector<TaskInfo> infos;
};

/// Manifest or generator output, restricted to data.tasks when given.
std::vector<TaskDataset> load_task_datasets(const RunConfig& cfg);
InputMode choose_input(const RunConfig& cfg, const std::vector<TaskDataset>& datasets);
Vocab build_vocab(const RunConfig& cfg, const std::vector<TaskDataset>& datasets);
ModelAssembly build_assembly(const RunConfig& cfg, const std::vector<TaskDataset>& datasets, InputMode input,
                             std::size_t vocab_size);

/// Loads (or takes) datasets, builds or reuses the vocabulary, the model
/// assembly and the encoded task table.
TaskData prepare_task_data(const RunConfig& cfg, const Vocab* vocab,
                           std::optional<std::vector<TaskDataset>> datasets = std::nullopt);

/// vocab.txt next to a checkpoint or in its run directory.
std::optional<Vocab> find_vocab_near(const std::string& checkpoint);

}  // namespace metaloop::runner

#endif  // METALOOP_RUNNER_TASKS_DATA_HPP
