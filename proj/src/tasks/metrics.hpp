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

#ifndef METALOOP_TASKS_METRICS_HPP
#define METALOOP_TASKS_METRICS_HPP

#include <span>

#include "tasks/dataset.hpp"

namespace metaloop {

double accuracy(std::span<const int> predicted, std::span<const int> gold);
/// Multiclass Matthews correlation; reduces to the usual MCC for k = 2.
/// Zero when either marginal is constant.
double matthews(std::span<const int> predicted, std::span<const int> gold, std::size_t k);
/// Zero when either side has no variance.
double pearson(std::span<const double> x, std::span<const double> y);
double mean_squared_error(std::span<const double> predicted, std::span<const double> gold);

}  // namespace metaloop

#endif  // METALOOP_TASKS_METRICS_HPP
