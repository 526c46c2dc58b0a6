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

#include "tasks/generators.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "autodiff/rng.hpp"
#include "common/error.hpp"

namespace metaloop {

double sinusoid_value(double amplitude, double phase, double x) {
  return amplitude * std::sin(x + phase);
}

std::vector<TaskDataset> gen_sinusoid_family(std::size_t n_tasks, std::size_t points_per_task,
                                             std::uint64_t seed, std::size_t dev_points) {
  if (n_tasks < 1) fail(ErrorKind::invalid_argument, "gen_sinusoid_family: n_tasks must be >= 1");
  if (points_per_task < 1)
    fail(ErrorKind::invalid_argument, "gen_sinusoid_family: points_per_task must be >= 1");
  if (dev_points == 0) dev_points = points_per_task;
  const RngStream root(seed, "sinusoid");
  std::vector<TaskDataset> out;
  out.reserve(n_tasks);
  for (std::size_t t = 0; t < n_tasks; ++t) {
    Rng rng = root.child(t).engine();
    TaskDataset ds;
    ds.id = "sin" + std::to_string(t);
    ds.head = HeadKind::regression;
    ds.metric = Metric::mse;
    const double amplitude = rng.uniform(0.1, 5.0);
    const double phase = rng.uniform(0.0, std::numbers::pi);
    ds.metadata = {{"amplitude", amplitude}, {"phase", phase}};
    auto draw = [&](std::vector<Example>& split, std::size_t n, const char* tag) {
      for (std::size_t i = 0; i < n; ++i) {
        Example e;
        e.id = ds.id + "/" + tag + std::to_string(i);
        const double x = rng.uniform(-5.0, 5.0);
        e.features = {x};
        e.target = sinusoid_value(amplitude, phase, x);
        split.push_back(std::move(e));
      }
    };
    draw(ds.train, points_per_task, "train");
    draw(ds.dev, dev_points, "dev");
    out.push_back(std::move(ds));
  }
  return out;
}

std::string family_keyword(const TextFamilyOptions& options, std::size_t group, std::size_t index) {
  return "w" + std::to_string(group * options.words_per_group + index);
}

std::vector<TaskDataset> gen_text_cls_family(std::size_t n_tasks, std::size_t vocab_size,
                                             std::size_t examples_per_task, std::uint64_t seed,
                                             const TextFamilyOptions& o) {
  if (n_tasks < 1) fail(ErrorKind::invalid_argument, "gen_text_cls_family: n_tasks must be >= 1");
  if (examples_per_task < 2)
    fail(ErrorKind::invalid_argument, "gen_text_cls_family: examples_per_task must be >= 2");
  const std::size_t keywords = o.groups * o.words_per_group;
  if (o.positive_groups < 1 || o.positive_groups >= o.groups)
    fail(ErrorKind::invalid_argument, "gen_text_cls_family: need 1 <= positive_groups < groups");
  if (vocab_size < keywords + 2)
    fail(ErrorKind::invalid_argument, "gen_text_cls_family: vocab_size too small for the keyword groups");
  if (o.min_len < 1 || o.max_len < o.min_len || o.max_keywords < 1)
    fail(ErrorKind::invalid_argument, "gen_text_cls_family: bad document length settings");
  const std::size_t filler = vocab_size - keywords;

  const RngStream root(seed, "text_family");
  std::vector<TaskDataset> out;
  out.reserve(n_tasks);
  for (std::size_t t = 0; t < n_tasks; ++t) {
    Rng rng = root.child(t).engine();
    std::vector<std::size_t> order(o.groups);
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = 0; i < o.positive_groups; ++i)
      std::swap(order[i], order[i + rng.below(o.groups - i)]);
    const std::vector<std::size_t> pos(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(o.positive_groups));
    const std::vector<std::size_t> neg(order.begin() + static_cast<std::ptrdiff_t>(o.positive_groups), order.end());

    TaskDataset ds;
    ds.id = "text" + std::to_string(t);
    ds.head = HeadKind::classification;
    ds.num_classes = 2;
    ds.metric = Metric::accuracy;
    for (std::size_t g : pos) ds.metadata["positive_group_" + std::to_string(g)] = 1.0;

    auto keyword_from = [&](const std::vector<std::size_t>& groups) {
      const std::size_t g = groups[rng.below(groups.size())];
      return family_keyword(o, g, rng.below(o.words_per_group));
    };
    auto document = [&](int label) {
      const std::size_t len = o.min_len + rng.below(o.max_len - o.min_len + 1);
      std::vector<std::string> words;
      words.reserve(len + o.max_keywords);
      for (std::size_t i = 0; i < len; ++i)
        words.push_back("w" + std::to_string(keywords + rng.below(filler)));
      std::size_t inserts = 0;
      const std::vector<std::size_t>* source = nullptr;
      if (label == 1) {
        source = &pos;
        inserts = 1 + rng.below(o.max_keywords);
      } else if (rng.bernoulli(o.distractor_prob)) {
        source = &neg;
        inserts = 1 + rng.below(o.max_keywords);
      }
      for (std::size_t k = 0; k < inserts; ++k) {
        const std::size_t at = rng.below(words.size() + 1);
        words.insert(words.begin() + static_cast<std::ptrdiff_t>(at), keyword_from(*source));
      }
      std::string text;
      for (const auto& w : words) {
        if (!text.empty()) text.push_back(' ');
        text += w;
      }
      return text;
    };
    auto fill = [&](std::vector<Example>& split, std::size_t n, const char* tag) {
      // Alternate labels, then shuffle, so counts differ by at most one.
      std::vector<int> labels(n);
      for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<int>(i % 2);
      for (std::size_t i = n; i > 1; --i) std::swap(labels[i - 1], labels[rng.below(i)]);
      for (std::size_t i = 0; i < n; ++i) {
        Example e;
        e.id = ds.id + "/" + tag + std::to_string(i);
        e.label = labels[i];
        e.text_a = document(e.label);
        split.push_back(std::move(e));
      }
    };
    fill(ds.train, examples_per_task, "train");
    fill(ds.dev, o.dev_examples, "dev");
    out.push_back(std::move(ds));
  }
  return out;
}

}  // namespace metaloop
