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

#include "tasks/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

#include "autodiff/rng.hpp"
#include "common/error.hpp"

namespace metaloop {

using nlohmann::json;
namespace fs = std::filesystem;

Metric parse_metric(const std::string& name) {
  if (name == "accuracy") return Metric::accuracy;
  if (name == "matthews") return Metric::matthews;
  if (name == "pearson") return Metric::pearson;
  if (name == "mse") return Metric::mse;
  fail(ErrorKind::config, "unknown metric '" + name + "' (accuracy|matthews|pearson|mse)");
}

std::string metric_name(Metric m) {
  switch (m) {
    case Metric::accuracy: return "accuracy";
    case Metric::matthews: return "matthews";
    case Metric::pearson: return "pearson";
    case Metric::mse: return "mse";
  }
  return "?";
}

bool higher_is_better(Metric m) { return m != Metric::mse; }

FileFormat parse_format(const std::string& name) {
  if (name == "jsonl") return FileFormat::jsonl;
  if (name == "csv") return FileFormat::csv;
  if (name == "tsv") return FileFormat::tsv;
  fail(ErrorKind::config, "unknown format '" + name + "' (jsonl|csv|tsv)");
}

const std::vector<Example>& TaskDataset::split(Split s) const {
  switch (s) {
    case Split::dev: return dev;
    case Split::test: return test;
    case Split::train: break;
  }
  return train;
}

void TaskDataset::validate() const {
  if (id.empty()) fail(ErrorKind::data, "task with empty id");
  if (train.empty()) fail(ErrorKind::data, "task " + id + ": train split is empty");
  if (head == HeadKind::classification && num_classes < 2)
    fail(ErrorKind::data, "task " + id + ": classification needs at least 2 classes");
  std::set<std::string> seen;
  for (const auto* part : {&train, &dev, &test}) {
    for (const auto& e : *part) {
      if (!seen.insert(e.id).second)
        fail(ErrorKind::data, "task " + id + ": example id '" + e.id + "' appears twice");
      if (head == HeadKind::classification &&
          (e.label < 0 || static_cast<std::size_t>(e.label) >= num_classes))
        fail(ErrorKind::data, "task " + id + ": label " + std::to_string(e.label) +
                                  " of example '" + e.id + "' outside [0, " +
                                  std::to_string(num_classes) + ")");
    }
  }
}

HeadSpec TaskDataset::head_spec(double default_dropout) const {
  HeadSpec h;
  h.kind = head;
  h.num_classes = head == HeadKind::classification ? num_classes : 2;
  h.dropout = dropout.value_or(default_dropout);
  return h;
}

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::io, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Record {
  std::size_t line = 0;
  std::vector<std::string> fields;
};

// RFC 4180 style: quoted fields may hold delimiters, doubled quotes and
// newlines. Blank lines are skipped.
std::vector<Record> parse_delimited(const std::string& text, char delim) {
  std::vector<Record> out;
  Record cur;
  std::string field;
  bool quoted = false, field_started = false;
  std::size_t line = 1;
  cur.line = 1;
  auto end_field = [&] {
    cur.fields.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    if (!(cur.fields.empty() && field.empty() && !field_started)) {
      end_field();
      out.push_back(std::move(cur));
    }
    cur = Record{};
    cur.line = line;
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    if (c == '"' && field.empty() && !field_started) {
      quoted = true;
      field_started = true;
    } else if (c == delim) {
      end_field();
    } else if (c == '\n') {
      ++line;
      end_record();
    } else if (c == '\r') {
      // tolerate CRLF
    } else {
      field.push_back(c);
      field_started = true;
    }
  }
  end_record();
  return out;
}

std::optional<double> parse_double(const std::string& s) {
  if (s.empty()) return std::nullopt;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::optional<int> parse_int(const std::string& s) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

// Fills label/target from a raw label string; returns an error message.
std::optional<std::string> set_label(Example& e, const std::string& raw, const SchemaMapping& schema,
                                     HeadKind head, std::size_t k) {
  if (head == HeadKind::regression) {
    const auto v = parse_double(raw);
    if (!v) return "unparseable regression target '" + raw + "'";
    e.target = *v;
    return std::nullopt;
  }
  if (!schema.label_names.empty()) {
    const auto it = std::find(schema.label_names.begin(), schema.label_names.end(), raw);
    if (it == schema.label_names.end()) return "unknown label '" + raw + "'";
    e.label = static_cast<int>(it - schema.label_names.begin());
    return std::nullopt;
  }
  const auto v = parse_int(raw);
  if (!v) return "unparseable label '" + raw + "'";
  if (*v < 0 || static_cast<std::size_t>(*v) >= k)
    return "label " + raw + " outside [0, " + std::to_string(k) + ")";
  e.label = *v;
  return std::nullopt;
}

std::string json_scalar_string(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number()) {
    std::ostringstream ss;
    ss.precision(17);
    ss << v.get<double>();
    return ss.str();
  }
  if (v.is_boolean()) return v.get<bool>() ? "1" : "0";
  return v.dump();
}

LoadReport read_jsonl(const std::string& text, const SchemaMapping& schema, HeadKind head,
                      std::size_t k) {
  LoadReport report;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    json row;
    try {
      row = json::parse(line);
    } catch (const json::exception& ex) {
      report.errors.push_back({lineno, std::string("invalid JSON: ") + ex.what()});
      continue;
    }
    if (!row.is_object()) {
      report.errors.push_back({lineno, "row is not an object"});
      continue;
    }
    Example e;
    std::optional<std::string> err;
    if (schema.id.empty()) {
      e.id = std::to_string(lineno);
    } else if (!row.contains(schema.id)) {
      err = "missing key '" + schema.id + "'";
    } else {
      e.id = json_scalar_string(row[schema.id]);
    }
    if (!err && !schema.text_a.empty()) {
      if (!row.contains(schema.text_a) || !row[schema.text_a].is_string())
        err = "missing string key '" + schema.text_a + "'";
      else
        e.text_a = row[schema.text_a].get<std::string>();
    }
    if (!err && !schema.text_b.empty() && row.contains(schema.text_b) && !row[schema.text_b].is_null()) {
      if (!row[schema.text_b].is_string()) err = "key '" + schema.text_b + "' is not a string";
      else e.text_b = row[schema.text_b].get<std::string>();
    }
    if (!err && !schema.features.empty()) {
      // A single feature column may hold an array.
      if (schema.features.size() == 1 && row.contains(schema.features[0]) &&
          row[schema.features[0]].is_array()) {
        for (const auto& v : row[schema.features[0]]) {
          if (!v.is_number()) {
            err = "non-numeric feature";
            break;
          }
          e.features.push_back(v.get<double>());
        }
      } else {
        for (const auto& f : schema.features) {
          if (!row.contains(f) || !row[f].is_number()) {
            err = "missing numeric feature '" + f + "'";
            break;
          }
          e.features.push_back(row[f].get<double>());
        }
      }
    }
    if (!err) {
      if (!row.contains(schema.label)) err = "missing key '" + schema.label + "'";
      else err = set_label(e, json_scalar_string(row[schema.label]), schema, head, k);
    }
    if (!err && schema.features.empty() && e.text_a.empty()) err = "empty text";
    if (err) report.errors.push_back({lineno, *err});
    else report.examples.push_back(std::move(e));
  }
  return report;
}

LoadReport read_table(const std::string& text, char delim, const std::string& path,
                      const SchemaMapping& schema, HeadKind head, std::size_t k) {
  const auto records = parse_delimited(text, delim);
  if (records.empty()) fail(ErrorKind::data, path + ": empty file");
  const auto& header = records[0].fields;
  auto column = [&](const std::string& name) -> std::ptrdiff_t {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) fail(ErrorKind::data, path + ": missing column '" + name + "'");
    return it - header.begin();
  };
  const std::ptrdiff_t id_col = schema.id.empty() ? -1 : column(schema.id);
  const std::ptrdiff_t a_col = schema.text_a.empty() ? -1 : column(schema.text_a);
  std::ptrdiff_t b_col = -1;
  if (!schema.text_b.empty()) {
    const auto it = std::find(header.begin(), header.end(), schema.text_b);
    if (it != header.end()) b_col = it - header.begin();
  }
  const std::ptrdiff_t label_col = column(schema.label);
  std::vector<std::ptrdiff_t> feature_cols;
  for (const auto& f : schema.features) feature_cols.push_back(column(f));

  LoadReport report;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.fields.size() != header.size()) {
      report.errors.push_back({rec.line, "expected " + std::to_string(header.size()) +
                                             " fields, found " + std::to_string(rec.fields.size())});
      continue;
    }
    auto at = [&](std::ptrdiff_t c) -> const std::string& {
      return rec.fields[static_cast<std::size_t>(c)];
    };
    Example e;
    e.id = id_col >= 0 ? at(id_col) : std::to_string(r);
    if (a_col >= 0) e.text_a = at(a_col);
    if (b_col >= 0) e.text_b = at(b_col);
    std::optional<std::string> err;
    for (std::size_t i = 0; i < feature_cols.size() && !err; ++i) {
      const auto v = parse_double(at(feature_cols[i]));
      if (!v) err = "unparseable feature '" + schema.features[i] + "'";
      else e.features.push_back(*v);
    }
    if (!err) err = set_label(e, at(label_col), schema, head, k);
    if (!err && feature_cols.empty() && e.text_a.empty()) err = "empty text";
    if (err) report.errors.push_back({rec.line, *err});
    else report.examples.push_back(std::move(e));
  }
  return report;
}

std::string format_errors(const std::string& path, const std::vector<RowError>& errors) {
  std::ostringstream ss;
  ss << path << ": " << errors.size() << " bad row(s)";
  const std::size_t shown = std::min<std::size_t>(errors.size(), 20);
  for (std::size_t i = 0; i < shown; ++i)
    ss << "\n  line " << errors[i].line << ": " << errors[i].message;
  if (shown < errors.size()) ss << "\n  ...";
  ss << "\n(rerun with --skip-bad to drop them)";
  return ss.str();
}

}  // namespace

LoadReport read_examples(const std::string& path, FileFormat format, const SchemaMapping& schema,
                         HeadKind head, std::size_t num_classes) {
  const std::string text = read_file(path);
  if (text.find_first_not_of(" \t\r\n") == std::string::npos)
    fail(ErrorKind::data, path + ": empty file");
  if (format == FileFormat::jsonl) return read_jsonl(text, schema, head, num_classes);
  const char delim = schema.delimiter ? schema.delimiter : (format == FileFormat::tsv ? '\t' : ',');
  return read_table(text, delim, path, schema, head, num_classes);
}

std::vector<Example> load_examples(const std::string& path, FileFormat format,
                                   const SchemaMapping& schema, HeadKind head,
                                   std::size_t num_classes, bool skip_bad,
                                   std::vector<RowError>* skipped) {
  LoadReport report = read_examples(path, format, schema, head, num_classes);
  if (!report.errors.empty()) {
    if (!skip_bad) fail(ErrorKind::data, format_errors(path, report.errors));
    if (skipped) skipped->insert(skipped->end(), report.errors.begin(), report.errors.end());
  }
  return std::move(report.examples);
}

void write_jsonl(const std::string& path, const std::vector<Example>& examples, HeadKind head) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::io, "cannot write " + path);
  for (const auto& e : examples) {
    json row;
    row["id"] = e.id;
    row["text_a"] = e.text_a;
    if (e.text_b) row["text_b"] = *e.text_b;
    if (!e.features.empty()) row["features"] = e.features;
    if (head == HeadKind::regression) row["label"] = e.target;
    else row["label"] = e.label;
    out << row.dump() << '\n';
  }
  if (!out) fail(ErrorKind::io, "write failed for " + path);
}

ManifestLoad load_manifest(const std::string& path, bool skip_bad) {
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::exception& ex) {
    fail(ErrorKind::config, path + ": invalid JSON: " + ex.what());
  }
  if (!doc.is_object() || !doc.contains("tasks") || !doc["tasks"].is_array())
    fail(ErrorKind::config, path + ": expected an object with a 'tasks' array");
  const fs::path base = fs::path(path).parent_path();
  ManifestLoad out;
  std::size_t index = 0;
  for (const auto& t : doc["tasks"]) {
    const std::string where = path + ": tasks[" + std::to_string(index++) + "]";
    auto str = [&](const char* key, const std::string& fallback) {
      if (!t.contains(key)) return fallback;
      if (!t[key].is_string()) fail(ErrorKind::config, where + "." + key + " must be a string");
      return t[key].get<std::string>();
    };
    TaskDataset ds;
    ds.id = str("id", "");
    if (ds.id.empty()) fail(ErrorKind::config, where + ".id is required");
    const std::string head = str("head", "classification");
    if (head == "classification") ds.head = HeadKind::classification;
    else if (head == "regression") ds.head = HeadKind::regression;
    else fail(ErrorKind::config, where + ".head must be classification or regression");
    if (t.contains("num_classes")) {
      if (!t["num_classes"].is_number_integer() || t["num_classes"].get<long long>() < 2)
        fail(ErrorKind::config, where + ".num_classes must be an integer >= 2");
      ds.num_classes = t["num_classes"].get<std::size_t>();
    }
    ds.metric = parse_metric(str("metric", ds.head == HeadKind::regression ? "pearson" : "accuracy"));
    const FileFormat format = parse_format(str("format", "jsonl"));
    SchemaMapping schema;
    if (t.contains("columns")) {
      const auto& c = t["columns"];
      if (!c.is_object()) fail(ErrorKind::config, where + ".columns must be an object");
      for (auto it = c.begin(); it != c.end(); ++it) {
        const std::string& k = it.key();
        if (k == "features") {
          if (!it->is_array()) fail(ErrorKind::config, where + ".columns.features must be an array");
          schema.features = it->get<std::vector<std::string>>();
          continue;
        }
        if (!it->is_string()) fail(ErrorKind::config, where + ".columns." + k + " must be a string");
        const std::string v = it->get<std::string>();
        if (k == "id") schema.id = v;
        else if (k == "text_a") schema.text_a = v;
        else if (k == "text_b") schema.text_b = v;
        else if (k == "label") schema.label = v;
        else fail(ErrorKind::config, where + ".columns." + k + " is not a known column role");
      }
    }
    if (t.contains("delimiter")) {
      const std::string d = str("delimiter", "");
      if (d.size() != 1) fail(ErrorKind::config, where + ".delimiter must be one character");
      schema.delimiter = d[0];
    }
    if (t.contains("label_names")) {
      if (!t["label_names"].is_array()) fail(ErrorKind::config, where + ".label_names must be an array");
      schema.label_names = t["label_names"].get<std::vector<std::string>>();
      if (ds.head == HeadKind::classification && !t.contains("num_classes"))
        ds.num_classes = schema.label_names.size();
    }
    if (t.contains("dropout")) {
      if (!t["dropout"].is_number()) fail(ErrorKind::config, where + ".dropout must be a number");
      const double d = t["dropout"].get<double>();
      if (!(d >= 0 && d < 1)) fail(ErrorKind::config, where + ".dropout must be in [0, 1)");
      ds.dropout = d;
    }
    if (!t.contains("splits") || !t["splits"].is_object() || !t["splits"].contains("train"))
      fail(ErrorKind::config, where + ".splits.train is required");
    for (auto it = t["splits"].begin(); it != t["splits"].end(); ++it) {
      if (!it->is_string()) fail(ErrorKind::config, where + ".splits." + it.key() + " must be a path");
      std::vector<Example>* target = nullptr;
      if (it.key() == "train") target = &ds.train;
      else if (it.key() == "dev") target = &ds.dev;
      else if (it.key() == "test") target = &ds.test;
      else fail(ErrorKind::config, where + ".splits." + it.key() + " is not train/dev/test");
      const fs::path file = base / it->get<std::string>();
      std::vector<RowError> skipped;
      *target = load_examples(file.string(), format, schema, ds.head, ds.num_classes, skip_bad, &skipped);
      for (auto& e : skipped) out.skipped.emplace_back(file.string(), std::move(e));
    }
    ds.validate();
    out.tasks.push_back(std::move(ds));
  }
  return out;
}

TaskDataset subsample(const TaskDataset& dataset, double fraction, std::uint64_t seed) {
  if (!(fraction > 0 && fraction <= 1))
    fail(ErrorKind::invalid_argument, "subsample fraction must be in (0, 1]");
  const std::size_t n = dataset.train.size();
  // The small epsilon keeps products such as 0.1 * 1000 from flooring to 99.
  std::size_t keep = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n) * (1 + 1e-12)));
  keep = std::clamp<std::size_t>(keep, n ? 1 : 0, n);
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng = RngStream(seed, "subsample").engine();
  for (std::size_t i = 0; i < keep; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(keep);
  std::sort(idx.begin(), idx.end());
  TaskDataset out = dataset;
  out.train.clear();
  for (std::size_t i : idx) out.train.push_back(dataset.train[i]);
  return out;
}

}  // namespace metaloop
