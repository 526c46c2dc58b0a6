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

#include "stockpred/baselines.hpp"

#include <cmath>

#include <Eigen/Dense>

#include "autodiff/rng.hpp"
#include "common/error.hpp"

namespace metaloop::stock {

double rand_baseline(std::span<const int> labels, std::size_t classes, std::uint64_t seed) {
  if (labels.empty()) fail(ErrorKind::data, "rand_baseline over zero windows");
  if (classes < 2) fail(ErrorKind::invalid_argument, "rand_baseline needs at least 2 classes");
  Rng rng = RngStream(seed, "rand_baseline").engine();
  std::size_t right = 0;
  for (int y : labels) right += static_cast<int>(rng.below(classes)) == y;
  return static_cast<double>(right) / static_cast<double>(labels.size());
}

std::vector<double> log_returns(const PriceSeries& prices) {
  std::vector<double> r;
  for (std::size_t i = 1; i < prices.points.size(); ++i)
    r.push_back(std::log(prices.points[i].close / prices.points[i - 1].close));
  return r;
}

double ArModel::predict(std::span<const double> recent) const {
  if (recent.size() < coefficients.size())
    fail(ErrorKind::data, "AR prediction needs " + std::to_string(coefficients.size()) + " past returns");
  double y = intercept;
  for (std::size_t j = 0; j < coefficients.size(); ++j) y += coefficients[j] * recent[recent.size() - 1 - j];
  return y;
}

ArModel fit_ar(std::span<const double> returns, std::size_t order) {
  if (order < 1) fail(ErrorKind::invalid_argument, "AR order must be >= 1");
  if (returns.size() < 2 * order + 1)
    fail(ErrorKind::data, "insufficient history for AR(" + std::to_string(order) + "): " +
                              std::to_string(returns.size()) + " returns");
  const std::size_t rows = returns.size() - order;
  Eigen::MatrixXd x(rows, order + 1);
  Eigen::VectorXd y(rows);
  for (std::size_t s = 0; s < rows; ++s) {
    const std::size_t target = s + order;
    x(static_cast<Eigen::Index>(s), 0) = 1.0;
    for (std::size_t j = 1; j <= order; ++j)
      x(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(j)) = returns[target - j];
    y(static_cast<Eigen::Index>(s)) = returns[target];
  }
  const Eigen::VectorXd beta = x.colPivHouseholderQr().solve(y);
  ArModel m;
  m.intercept = beta(0);
  for (std::size_t j = 1; j <= order; ++j) m.coefficients.push_back(beta(static_cast<Eigen::Index>(j)));
  return m;
}

double ar_baseline(const PriceSeries& prices, std::size_t order,
                   const std::vector<StockWindow>& windows, std::size_t fit_days, LabelMode mode,
                   double epsilon) {
  if (windows.empty()) fail(ErrorKind::data, "ar_baseline over zero windows");
  const std::vector<double> r = log_returns(prices);
  if (fit_days > prices.points.size()) fail(ErrorKind::invalid_argument, "fit_days beyond the series");
  const std::size_t fit_returns = fit_days > 0 ? fit_days - 1 : 0;
  const ArModel model = fit_ar(std::span<const double>(r).first(fit_returns), order);
  std::size_t right = 0;
  for (const auto& w : windows) {
    // Returns known at the close of day t are r_1..r_t, i.e. r[0..t-1].
    if (w.anchor < order)
      fail(ErrorKind::data, "window at anchor " + std::to_string(w.anchor) + " has fewer than " +
                                std::to_string(order) + " past returns");
    const double next = model.predict(std::span<const double>(r).first(w.anchor));
    Movement guess;
    if (mode == LabelMode::binary) guess = next > 0 ? Movement::up : Movement::down;
    else guess = label_movement(1.0, std::exp(next), epsilon);
    right += class_index(guess, mode) == w.label;
  }
  return static_cast<double>(right) / static_cast<double>(windows.size());
}

}  // namespace metaloop::stock
