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

#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "common/error.hpp"
#include "runner/run.hpp"

namespace metaloop::runner {

namespace fs = std::filesystem;

namespace {

struct Series {
  // x -> (sum, count); averaged over tasks and seeds at the same x.
  std::map<double, std::pair<double, std::size_t>> points;
  void add(double x, double v) {
    auto& p = points[x];
    p.first += v;
    ++p.second;
  }
};

std::string safe_name(const std::string& s) {
  std::string out;
  for (char c : s) out.push_back(std::isalnum(static_cast<unsigned char>(c)) ? c : '_');
  return out;
}

fs::path resolve_run(const std::string& ref, const std::string& root) {
  if (fs::is_directory(ref)) return ref;
  const fs::path under = fs::path(root) / ref;
  if (fs::is_directory(under)) return under;
  fail(ErrorKind::io, "run '" + ref + "' not found (looked in . and " + root + ")");
}

}  // namespace

std::vector<std::string> cmd_report(const std::vector<std::string>& runs, const std::string& runs_root,
                                    const std::string& out_dir) {
  if (runs.empty()) fail(ErrorKind::invalid_argument, "report needs at least one run");
  // figure name -> column label -> series
  std::map<std::string, std::map<std::string, Series>> figures;
  std::map<std::string, std::string> x_names;
  std::vector<std::string> labels;
  for (const auto& ref : runs) {
    const fs::path dir = resolve_run(ref, runs_root);
    fs::path norm = fs::absolute(dir).lexically_normal();
    if (norm.filename().empty()) norm = norm.parent_path();  // trailing slash
    const std::string label = norm.filename().string();
    if (std::find(labels.begin(), labels.end(), label) != labels.end())
      fail(ErrorKind::invalid_argument, "run '" + label + "' listed twice");
    labels.push_back(label);
    const fs::path log = dir / "metrics.jsonl";
    if (!fs::is_regular_file(log)) fail(ErrorKind::io, "run '" + ref + "' has no metrics.jsonl");
    for (const auto& r : read_metric_log(log.string())) {
      std::string fig;
      double x;
      if (r.fraction) {
        fig = "adapt_" + safe_name(r.split) + "_" + safe_name(r.metric);
        x = *r.fraction;
        x_names[fig] = "fraction";
      } else {
        fig = "curve_" + safe_name(r.split) + "_" + safe_name(r.metric);
        x = static_cast<double>(r.step);
        x_names[fig] = "step";
      }
      figures[fig][label].add(x, r.value);
    }
  }
  fs::create_directories(out_dir);
  std::vector<std::string> written;
  for (const auto& [fig, columns] : figures) {
    std::set<double> xs;
    for (const auto& [label, series] : columns)
      for (const auto& [x, p] : series.points) xs.insert(x);
    const std::string path = (fs::path(out_dir) / (fig + ".csv")).string();
    std::ofstream out(path, std::ios::binary);
    out << x_names[fig];
    // Keep the order the runs were given in.
    for (const auto& label : labels)
      if (columns.count(label)) out << ',' << label;
    out << '\n';
    for (double x : xs) {
      out << format_real(x);
      for (const auto& label : labels) {
        const auto c = columns.find(label);
        if (c == columns.end()) continue;
        out << ',';
        const auto p = c->second.points.find(x);
        if (p != c->second.points.end()) out << format_real(p->second.first / static_cast<double>(p->second.second));
      }
      out << '\n';
    }
    if (!out) fail(ErrorKind::io, "cannot write " + path);
    written.push_back(path);
  }
  return written;
}

}  // namespace metaloop::runner
