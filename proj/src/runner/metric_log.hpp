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

#ifndef METALOOP_RUNNER_METRIC_LOG_HPP
#define METALOOP_RUNNER_METRIC_LOG_HPP

#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

namespace metaloop::runner {

struct MetricRecord {
  std::string run;
  std::int64_t step = 0;
  std::string task;
  std::string split;
  std::string metric;
  double value = 0;
  std::optional<double> wall_time;  // seconds since run start
  // Adaptation sweeps only.
  std::optional<double> fraction;
  std::optional<std::uint64_t> seed;

  bool operator==(const MetricRecord&) const = default;
};

std::string to_json_line(const MetricRecord& r);
MetricRecord parse_metric_line(const std::string& line);

/// Append-only JSONL writer; every record is flushed as written.
class MetricLog {
 public:
  MetricLog() = default;
  explicit MetricLog(const std::string& path);
  void append(const MetricRecord& r);
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::ofstream out_;
};

std::vector<MetricRecord> read_metric_log(const std::string& path);

}  // namespace metaloop::runner

#endif  // METALOOP_RUNNER_METRIC_LOG_HPP
