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

#ifndef METALOOP_TESTS_SUPPORT_QUADRATIC_HPP
#define METALOOP_TESTS_SUPPORT_QUADRATIC_HPP

#include <map>
#include <string>

#include "autodiff/ops.hpp"
#include "meta/meta.hpp"

namespace metaloop::testing {

/// L_c(theta) = (theta - c)^2 / 2 with c chosen by task id; examples are
/// ignored, which is all the closed-form oracle needs.
inline TaskObjective quadratic_objective(std::map<std::string, double> centers) {
  return [centers](const ParamSet& p, const std::string& task, std::span<const std::size_t>,
                   ForwardMode, const RngStream&) {
    const ad::Tensor d = ad::add_scalar(p.at("theta"), -centers.at(task));
    return ad::scale(ad::square(d), 0.5);
  };
}

inline ParamSet scalar_theta(double v) {
  return ParamSet({{"theta", ad::Tensor::parameter({}, {v})}});
}

inline Episode quadratic_episode(const std::string& task) { return {task, {0}, {1}}; }

}  // namespace metaloop::testing

#endif  // METALOOP_TESTS_SUPPORT_QUADRATIC_HPP
