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

#ifndef METALOOP_TASKS_OBJECTIVE_HPP
#define METALOOP_TASKS_OBJECTIVE_HPP

#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "meta/meta.hpp"
#include "models/model.hpp"
#include "tasks/dataset.hpp"
#include "tasks/text.hpp"

namespace metaloop {

/// A split in model-ready form: token ids or feature rows, plus targets.
struct EncodedSplit {
  std::vector<std::vector<int>> tokens;
  std::vector<std::vector<double>> features;
  std::vector<int> labels;
  std::vector<double> targets;

  std::size_t size() const { return labels.size(); }
  ModelInput input(std::span<const std::size_t> idx) const;
};

/// `vocab` is required for token_sequence input.
EncodedSplit encode_split(const std::vector<Example>& examples, InputMode mode,
                          const Vocab* vocab, std::size_t max_len);

struct EncodedTask {
  std::string id;
  HeadKind head = HeadKind::classification;
  std::size_t num_classes = 2;
  Metric metric = Metric::accuracy;
  EncodedSplit train, dev, test;

  const EncodedSplit& split(Split s) const;
};

EncodedTask encode_task(const TaskDataset& ds, InputMode mode, const Vocab* vocab,
                        std::size_t max_len);

using TaskTable = std::map<std::string, EncodedTask>;

/// Cross-entropy for classification heads, squared error for regression.
ad::Tensor supervised_loss(HeadKind head, const ad::Tensor& output, const EncodedSplit& split,
                           std::span<const std::size_t> idx);

/// Objective over the train splits in `table`.
TaskObjective supervised_objective(const ModelAssembly& assembly,
                                   std::shared_ptr<const TaskTable> table);

/// Eval-mode outputs for every example of `split`, in order, batched.
ad::Tensor predict(const ModelAssembly& assembly, const ParamSet& params, const std::string& task,
                   const EncodedSplit& split, std::size_t batch = 256);

/// The task's declared metric on one split.
double evaluate(const ModelAssembly& assembly, const ParamSet& params, const EncodedTask& task,
                const EncodedSplit& split, std::size_t batch = 256);

double metric_from_outputs(const EncodedTask& task, const ad::Tensor& outputs,
                           const EncodedSplit& split);

}  // namespace metaloop

#endif  // METALOOP_TASKS_OBJECTIVE_HPP
