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

#include "tasks/objective.hpp"

#include <algorithm>
#include <numeric>

#include "autodiff/ops.hpp"
#include "common/error.hpp"
#include "tasks/metrics.hpp"

namespace metaloop {

ModelInput EncodedSplit::input(std::span<const std::size_t> idx) const {
  ModelInput in;
  for (std::size_t i : idx) {
    if (i >= size()) fail(ErrorKind::invalid_argument, "example index " + std::to_string(i) + " out of range");
    if (!features.empty()) in.features.push_back(features[i]);
    else in.tokens.push_back(tokens[i]);
  }
  return in;
}

EncodedSplit encode_split(const std::vector<Example>& examples, InputMode mode, const Vocab* vocab,
                          std::size_t max_len) {
  if (mode == InputMode::token_sequence && !vocab)
    fail(ErrorKind::invalid_argument, "token input needs a vocabulary");
  EncodedSplit out;
  for (const auto& e : examples) {
    if (mode == InputMode::feature_vector) {
      out.features.push_back(e.features);
    } else {
      std::optional<std::string_view> b;
      if (e.text_b) b = *e.text_b;
      out.tokens.push_back(encode_text(*vocab, e.text_a, b, max_len));
    }
    out.labels.push_back(e.label);
    out.targets.push_back(e.target);
  }
  return out;
}

const EncodedSplit& EncodedTask::split(Split s) const {
  switch (s) {
    case Split::dev: return dev;
    case Split::test: return test;
    case Split::train: break;
  }
  return train;
}

EncodedTask encode_task(const TaskDataset& ds, InputMode mode, const Vocab* vocab,
                        std::size_t max_len) {
  EncodedTask t;
  t.id = ds.id;
  t.head = ds.head;
  t.num_classes = ds.num_classes;
  t.metric = ds.metric;
  t.train = encode_split(ds.train, mode, vocab, max_len);
  t.dev = encode_split(ds.dev, mode, vocab, max_len);
  t.test = encode_split(ds.test, mode, vocab, max_len);
  return t;
}

ad::Tensor supervised_loss(HeadKind head, const ad::Tensor& output, const EncodedSplit& split,
                           std::span<const std::size_t> idx) {
  if (head == HeadKind::classification) {
    std::vector<int> labels;
    labels.reserve(idx.size());
    for (std::size_t i : idx) labels.push_back(split.labels[i]);
    return ad::cross_entropy(output, labels);
  }
  std::vector<double> targets;
  targets.reserve(idx.size());
  for (std::size_t i : idx) targets.push_back(split.targets[i]);
  return ad::mse(output, ad::Tensor::constant({idx.size(), 1}, std::move(targets)));
}

TaskObjective supervised_objective(const ModelAssembly& assembly,
                                   std::shared_ptr<const TaskTable> table) {
  return [assembly, table](const ParamSet& params, const std::string& task,
                           std::span<const std::size_t> idx, ForwardMode mode,
                           const RngStream& stream) {
    const auto it = table->find(task);
    if (it == table->end()) fail(ErrorKind::invalid_argument, "unknown task '" + task + "'");
    const EncodedSplit& split = it->second.train;
    const ad::Tensor out = forward(assembly, params, task, split.input(idx), mode, stream);
    return supervised_loss(it->second.head, out, split, idx);
  };
}

ad::Tensor predict(const ModelAssembly& assembly, const ParamSet& params, const std::string& task,
                   const EncodedSplit& split, std::size_t batch) {
  ad::GradModeGuard no_grad(false);
  const std::size_t n = split.size();
  if (n == 0) fail(ErrorKind::data, "predict on an empty split of task " + task);
  std::vector<double> values;
  std::size_t width = 0;
  std::vector<std::size_t> idx;
  for (std::size_t start = 0; start < n; start += batch) {
    idx.resize(std::min(batch, n - start));
    std::iota(idx.begin(), idx.end(), start);
    const ad::Tensor out = forward(assembly, params, task, split.input(idx), ForwardMode::eval, RngStream(0));
    width = out.dim(1);
    values.insert(values.end(), out.data().begin(), out.data().end());
  }
  return ad::Tensor::constant({n, width}, std::move(values));
}

double metric_from_outputs(const EncodedTask& task, const ad::Tensor& outputs,
                           const EncodedSplit& split) {
  const std::size_t n = split.size();
  if (task.head == HeadKind::regression) {
    const std::vector<double> pred(outputs.data().begin(), outputs.data().end());
    if (task.metric == Metric::pearson) return pearson(pred, split.targets);
    if (task.metric == Metric::mse) return mean_squared_error(pred, split.targets);
    fail(ErrorKind::config, "task " + task.id + ": metric " + metric_name(task.metric) +
                                " does not apply to regression");
  }
  const std::size_t k = outputs.dim(1);
  std::vector<int> pred(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = outputs.data().subspan(i * k, k);
    pred[i] = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
  }
  if (task.metric == Metric::accuracy) return accuracy(pred, split.labels);
  if (task.metric == Metric::matthews) return matthews(pred, split.labels, k);
  fail(ErrorKind::config, "task " + task.id + ": metric " + metric_name(task.metric) +
                              " does not apply to classification");
}

double evaluate(const ModelAssembly& assembly, const ParamSet& params, const EncodedTask& task,
                const EncodedSplit& split, std::size_t batch) {
  return metric_from_outputs(task, predict(assembly, params, task.id, split, batch), split);
}

}  // namespace metaloop
