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

#include "runner/metric_log.hpp"

#include <cmath>

#include <json.hpp>

#include "common/error.hpp"

namespace metaloop::runner {

using nlohmann::json;

std::string to_json_line(const MetricRecord& r) {
  if (!std::isfinite(r.value)) fail(ErrorKind::numeric, "refusing to log non-finite " + r.metric);
  nlohmann::ordered_json j = {{"run", r.run}, {"step", r.step}, {"task", r.task},
            {"split", r.split}, {"metric", r.metric}, {"value", r.value}};
  if (r.wall_time) j["wall_time"] = *r.wall_time;
  if (r.fraction) j["fraction"] = *r.fraction;
  if (r.seed) j["seed"] = *r.seed;
  return j.dump();
}

MetricRecord parse_metric_line(const std::string& line) {
  const json j = json::parse(line);
  if (!j.is_object()) throw std::runtime_error("record is not an object");
  MetricRecord r;
  r.run = j.at("run").get<std::string>();
  r.step = j.at("step").get<std::int64_t>();
  r.task = j.at("task").get<std::string>();
  r.split = j.at("split").get<std::string>();
  r.metric = j.at("metric").get<std::string>();
  r.value = j.at("value").get<double>();
  if (j.contains("wall_time")) r.wall_time = j.at("wall_time").get<double>();
  if (j.contains("fraction")) r.fraction = j.at("fraction").get<double>();
  if (j.contains("seed")) r.seed = j.at("seed").get<std::uint64_t>();
  return r;
}

MetricLog::MetricLog(const std::string& path) : path_(path), out_(path, std::ios::app | std::ios::binary) {
  if (!out_) fail(ErrorKind::io, "cannot open metric log " + path);
}

void MetricLog::append(const MetricRecord& r) {
  out_ << to_json_line(r) << '\n';
  out_.flush();
  if (!out_) fail(ErrorKind::io, "write failed on metric log " + path_);
}

std::vector<MetricRecord> read_metric_log(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::io, "cannot open metric log " + path);
  std::vector<MetricRecord> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    try {
      out.push_back(parse_metric_line(line));
    } catch (const std::exception& e) {
      fail(ErrorKind::data, path + ":" + std::to_string(n) + ": corrupt metric record (" + e.what() + ")");
    }
  }
  return out;
}

}  // namespace metaloop::runner
