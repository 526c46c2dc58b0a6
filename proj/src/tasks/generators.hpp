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

#ifndef METALOOP_TASKS_GENERATORS_HPP
#define METALOOP_TASKS_GENERATORS_HPP

#include <cstdint>
#include <vector>

#include "tasks/dataset.hpp"

namespace metaloop {

/// y = A sin(x + phi) with A ~ U[0.1, 5], phi ~ U[0, pi], x ~ U[-5, 5].
/// Each task records "amplitude" and "phase" in its metadata. Dev gets
/// dev_points fresh x values (0 = same count as train).
std::vector<TaskDataset> gen_sinusoid_family(std::size_t n_tasks, std::size_t points_per_task,
                                             std::uint64_t seed, std::size_t dev_points = 0);

double sinusoid_value(double amplitude, double phase, double x);

/// Keyword-set membership tasks over a shared vocabulary "w0".."w{V-1}".
/// The first groups * words_per_group words are keywords, split into
/// groups; the rest are filler. Each task marks positive_groups groups as
/// positive: a document is positive iff it contains one of their keywords.
/// Negatives may carry keywords from the other groups as distractors.
struct TextFamilyOptions {
  std::size_t groups = 8;
  std::size_t words_per_group = 4;
  std::size_t positive_groups = 2;
  std::size_t min_len = 8;
  std::size_t max_len = 16;
  std::size_t max_keywords = 2;
  double distractor_prob = 0.5;
  std::size_t dev_examples = 200;
};

std::vector<TaskDataset> gen_text_cls_family(std::size_t n_tasks, std::size_t vocab_size,
                                             std::size_t examples_per_task, std::uint64_t seed,
                                             const TextFamilyOptions& options = {});

/// Keyword word for (group, index) under the default naming.
std::string family_keyword(const TextFamilyOptions& options, std::size_t group, std::size_t index);

}  // namespace metaloop

#endif  // METALOOP_TASKS_GENERATORS_HPP
