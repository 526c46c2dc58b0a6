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

#include <chrono>
#include <cstdio>
#include <exception>
#include <set>
#include <string>

#include "criteria.hpp"

using namespace metaloop::acceptance;

int main(int argc, char** argv) {
  std::set<std::string> only;
  for (int i = 1; i < argc; ++i) only.insert(argv[i]);
  std::vector<Criterion> all;
  for (auto group : {exact_criteria, learning_criteria, run_criteria}) {
    auto part = group();
    all.insert(all.end(), part.begin(), part.end());
  }
  int failed = 0;
  for (const auto& c : all) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (secs > c.budget_seconds) {
      out.pass = false;
      out.detail += " [over runtime budget]";
    }
    std::printf("[%s] %s %s: %s (%.1fs, budget %.0fs)\n", out.pass ? "PASS" : "FAIL", c.id.c_str(),
                c.title.c_str(), out.detail.c_str(), secs, c.budget_seconds);
    std::fflush(stdout);
    failed += out.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
