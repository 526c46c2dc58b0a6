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

#include "tasks/metrics.hpp"

#include <cmath>
#include <vector>

#include "common/error.hpp"

namespace metaloop {

namespace {

void check_sizes(std::size_t a, std::size_t b) {
  if (a != b) fail(ErrorKind::invalid_argument, "metric inputs differ in length");
  if (a == 0) fail(ErrorKind::invalid_argument, "metric over an empty set");
}

}  // namespace

double accuracy(std::span<const int> predicted, std::span<const int> gold) {
  check_sizes(predicted.size(), gold.size());
  std::size_t right = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) right += predicted[i] == gold[i];
  return static_cast<double>(right) / static_cast<double>(gold.size());
}

double matthews(std::span<const int> predicted, std::span<const int> gold, std::size_t k) {
  check_sizes(predicted.size(), gold.size());
  std::vector<double> p(k, 0), t(k, 0);
  double correct = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (predicted[i] < 0 || gold[i] < 0 || static_cast<std::size_t>(predicted[i]) >= k ||
        static_cast<std::size_t>(gold[i]) >= k)
      fail(ErrorKind::invalid_argument, "matthews: class index out of range");
    p[static_cast<std::size_t>(predicted[i])] += 1;
    t[static_cast<std::size_t>(gold[i])] += 1;
    correct += predicted[i] == gold[i];
  }
  const double s = static_cast<double>(gold.size());
  double pt = 0, pp = 0, tt = 0;
  for (std::size_t c = 0; c < k; ++c) {
    pt += p[c] * t[c];
    pp += p[c] * p[c];
    tt += t[c] * t[c];
  }
  const double denom = std::sqrt((s * s - pp) * (s * s - tt));
  return denom == 0 ? 0.0 : (correct * s - pt) / denom;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  check_sizes(x.size(), y.size());
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxx == 0 || syy == 0 ? 0.0 : sxy / std::sqrt(sxx * syy);
}

double mean_squared_error(std::span<const double> predicted, std::span<const double> gold) {
  check_sizes(predicted.size(), gold.size());
  double s = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) s += (predicted[i] - gold[i]) * (predicted[i] - gold[i]);
  return s / static_cast<double>(gold.size());
}

}  // namespace metaloop
