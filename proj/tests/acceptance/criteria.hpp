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

#ifndef METALOOP_TESTS_ACCEPTANCE_CRITERIA_HPP
#define METALOOP_TESTS_ACCEPTANCE_CRITERIA_HPP

#include <functional>
#include <string>
#include <vector>

namespace metaloop::acceptance {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  std::string id;
  std::string title;
  double budget_seconds;
  std::function<Outcome()> run;
};

std::vector<Criterion> exact_criteria();     // A1-A4, A7, A8
std::vector<Criterion> learning_criteria();  // A5, A6, A9
std::vector<Criterion> run_criteria();       // A10

}  // namespace metaloop::acceptance

#endif  // METALOOP_TESTS_ACCEPTANCE_CRITERIA_HPP
