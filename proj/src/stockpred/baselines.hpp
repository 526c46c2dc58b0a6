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

#ifndef METALOOP_STOCKPRED_BASELINES_HPP
#define METALOOP_STOCKPRED_BASELINES_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "stockpred/data.hpp"

namespace metaloop::stock {

/// Accuracy of uniform random guesses over `classes` labels.
double rand_baseline(std::span<const int> labels, std::size_t classes, std::uint64_t seed);

/// r_i = ln(p_i / p_{i-1}) for i = 1..n-1; element i-1 holds r_i.
std::vector<double> log_returns(const PriceSeries& prices);

struct ArModel {
  double intercept = 0;
  std::vector<double> coefficients;  // a_1 .. a_p

  /// c + sum_j a_j * recent[size - j].
  double predict(std::span<const double> recent) const;
};

/// Least-squares AR(p) with intercept on `returns`.
ArModel fit_ar(std::span<const double> returns, std::size_t order);

/// Fits AR(order) on the returns of the first fit_days prices, then
/// predicts each window's next return from the returns up to its anchor:
/// binary windows score the sign; ternary windows apply the epsilon rule.
double ar_baseline(const PriceSeries& prices, std::size_t order,
                   const std::vector<StockWindow>& windows, std::size_t fit_days, LabelMode mode,
                   double epsilon);

}  // namespace metaloop::stock

#endif  // METALOOP_STOCKPRED_BASELINES_HPP
