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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <numeric>
#include <set>

#include "common/error.hpp"
#include "tasks/dataset.hpp"
#include "tasks/generators.hpp"
#include "tasks/metrics.hpp"
#include "tasks/objective.hpp"
#include "tasks/text.hpp"

using namespace metaloop;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("metaloop_tasks_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string write(const std::string& name, const std::string& body) const {
    const auto p = path / name;
    fs::create_directories(p.parent_path());
    std::ofstream(p, std::ios::binary) << body;
    return p.string();
  }
};

bool same_examples(const std::vector<Example>& a, const std::vector<Example>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].id != b[i].id || a[i].text_a != b[i].text_a || a[i].text_b != b[i].text_b ||
        a[i].label != b[i].label || a[i].target != b[i].target || a[i].features != b[i].features)
      return false;
  }
  return true;
}

}  // namespace

TEST_CASE("jsonl loader") {
  TempDir dir;
  const auto path = dir.write("a.jsonl",
                              "{\"id\":\"1\",\"text_a\":\"good film\",\"label\":1}\n"
                              "{\"id\":\"2\",\"text_a\":\"bad\",\"text_b\":\"very\",\"label\":0}\n"
                              "\n"
                              "{\"id\":3,\"text_a\":\"meh\",\"label\":1}\n");
  const SchemaMapping schema;
  const auto rows = load_examples(path, FileFormat::jsonl, schema, HeadKind::classification, 2, false);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].text_a == "good film");
  CHECK(rows[1].text_b == std::optional<std::string>("very"));
  CHECK_FALSE(rows[0].text_b.has_value());
  CHECK(rows[2].id == "3");

  const auto bad = dir.write("b.jsonl",
                             "{\"id\":\"1\",\"text_a\":\"x\",\"label\":1}\n"
                             "{\"id\":\"2\",\"text_a\":\"y\",\"label\":5}\n"
                             "not json\n");
  const auto report = read_examples(bad, FileFormat::jsonl, schema, HeadKind::classification, 2);
  CHECK(report.examples.size() == 1);
  REQUIRE(report.errors.size() == 2);
  CHECK(report.errors[0].line == 2);
  CHECK(report.errors[0].message.find("outside [0, 2)") != std::string::npos);
  try {
    load_examples(bad, FileFormat::jsonl, schema, HeadKind::classification, 2, false);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    CHECK(e.kind() == ErrorKind::data);
  }
  std::vector<RowError> skipped;
  CHECK(load_examples(bad, FileFormat::jsonl, schema, HeadKind::classification, 2, true, &skipped).size() == 1);
  CHECK(skipped.size() == 2);

  CHECK_THROWS_AS(load_examples(dir.write("empty.jsonl", "\n\n"), FileFormat::jsonl, schema,
                                HeadKind::classification, 2, false),
                  Error);
  CHECK_THROWS_AS(load_examples((dir.path / "none.jsonl").string(), FileFormat::jsonl, schema,
                                HeadKind::classification, 2, false),
                  Error);
}

TEST_CASE("csv and tsv loaders") {
  TempDir dir;
  SchemaMapping schema;
  schema.text_a = "sentence";
  const auto csv = dir.write("a.csv",
                             "id,sentence,label\n"
                             "a,\"hello, world\",1\n"
                             "b,\"she said \"\"hi\"\"\",0\r\n"
                             "c,\"two\nlines\",1\n");
  const auto rows = load_examples(csv, FileFormat::csv, schema, HeadKind::classification, 2, false);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].text_a == "hello, world");
  CHECK(rows[1].text_a == "she said \"hi\"");
  CHECK(rows[2].text_a == "two\nlines");

  const auto tsv = dir.write("a.tsv", "id\tsentence\tlabel\nx\tfine\t0.5\ny\tok\tabc\n");
  const auto rep = read_examples(tsv, FileFormat::tsv, schema, HeadKind::regression, 2);
  REQUIRE(rep.examples.size() == 1);
  CHECK(rep.examples[0].target == 0.5);
  REQUIRE(rep.errors.size() == 1);
  CHECK(rep.errors[0].line == 3);

  const auto missing = dir.write("m.csv", "id,text,label\n1,a,0\n");
  try {
    load_examples(missing, FileFormat::csv, schema, HeadKind::classification, 2, false);
    FAIL("expected missing column");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("missing column 'sentence'") != std::string::npos);
  }

  SchemaMapping named = schema;
  named.label_names = {"neg", "pos"};
  const auto names = dir.write("n.csv", "id,sentence,label\n1,a,pos\n2,b,neg\n3,c,huh\n");
  const auto nr = read_examples(names, FileFormat::csv, named, HeadKind::classification, 2);
  CHECK(nr.examples.size() == 2);
  CHECK(nr.examples[0].label == 1);
  CHECK(nr.errors.size() == 1);
}

TEST_CASE("jsonl round trip") {
  TempDir dir;
  std::vector<Example> rows(3);
  rows[0] = {"a", "first one", std::nullopt, {}, 1, 0};
  rows[1] = {"b", "pair left", std::string("pair right"), {}, 0, 0};
  rows[2] = {"c", "third", std::nullopt, {}, 1, 0};
  const auto path = (dir.path / "rt.jsonl").string();
  write_jsonl(path, rows, HeadKind::classification);
  CHECK(same_examples(load_examples(path, FileFormat::jsonl, {}, HeadKind::classification, 2, false), rows));

  auto sin = gen_sinusoid_family(1, 5, 3)[0].train;
  for (auto& e : sin) e.text_a.clear();
  SchemaMapping feats;
  feats.features = {"features"};
  write_jsonl(path, sin, HeadKind::regression);
  CHECK(same_examples(load_examples(path, FileFormat::jsonl, feats, HeadKind::regression, 2, false), sin));
}

TEST_CASE("manifest") {
  TempDir dir;
  dir.write("t/train.jsonl", "{\"id\":\"1\",\"text_a\":\"a\",\"label\":\"pos\"}\n{\"id\":\"2\",\"text_a\":\"b\",\"label\":\"neg\"}\n");
  dir.write("t/dev.jsonl", "{\"id\":\"3\",\"text_a\":\"c\",\"label\":\"pos\"}\n");
  const auto m = dir.write("manifest.json", R"({"tasks": [{"id": "t", "metric": "matthews",
      "label_names": ["neg", "pos"], "dropout": 0.05,
      "splits": {"train": "t/train.jsonl", "dev": "t/dev.jsonl"}}]})");
  const auto loaded = load_manifest(m, false);
  REQUIRE(loaded.tasks.size() == 1);
  const auto& t = loaded.tasks[0];
  CHECK(t.train.size() == 2);
  CHECK(t.dev.size() == 1);
  CHECK(t.metric == Metric::matthews);
  CHECK(t.head_spec().dropout == 0.05);
  CHECK(t.train[0].label == 1);

  const auto dup = dir.write("dup.json", R"({"tasks": [{"id": "t", "label_names": ["neg","pos"],
      "splits": {"train": "t/train.jsonl", "dev": "t/train.jsonl"}}]})");
  CHECK_THROWS_AS(load_manifest(dup, false), Error);
  const auto bad = dir.write("bad.json", R"({"tasks": [{"id": "t", "splits": {}}]})");
  try {
    load_manifest(bad, false);
    FAIL("expected config error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("splits.train") != std::string::npos);
  }
}

TEST_CASE("tokenizer") {
  CHECK(split_words("Hello, World!  it's") ==
        std::vector<std::string>{"hello", ",", "world", "!", "it", "'", "s"});
  const Vocab v = Vocab::build({"x y z", "x y", "x"});
  CHECK(v.token(0) == "[PAD]");
  CHECK(v.token(1) == "[UNK]");
  CHECK(v.token(2) == "[SEP]");
  CHECK(v.id("x") == 3);
  CHECK(v.id("y") == 4);
  CHECK(v.id("nope") == Vocab::kUnk);
  CHECK(encode_text(v, "", std::string_view("x"), 64) == std::vector<int>{Vocab::kSep, v.id("x")});
  CHECK(encode_text(v, "X y", std::nullopt, 64) == encode_text(v, "X y", std::nullopt, 64));
  CHECK(Vocab::build({"x y z", "x y", "x"}) == v);

  std::string a, b;
  for (int i = 0; i < 70; ++i) a += "x ";
  for (int i = 0; i < 30; ++i) b += "y ";
  const auto ids = encode_text(v, a, std::string_view(b), 64);
  CHECK(ids.size() == 64);
  const auto sep = std::find(ids.begin(), ids.end(), Vocab::kSep) - ids.begin();
  // 63 content slots: the 70-token side shrinks to 33, then alternates: 32 + 31... here b stays 30.
  CHECK(sep == 33);
  CHECK(std::count(ids.begin(), ids.end(), v.id("y")) == 30);

  std::string c;
  for (int i = 0; i < 50; ++i) c += "z ";
  const auto even = encode_text(v, c, std::string_view(c), 64);
  CHECK(even.size() == 64);
  CHECK(std::find(even.begin(), even.end(), Vocab::kSep) - even.begin() == 32);

  TempDir dir;
  const auto path = (dir.path / "vocab.txt").string();
  v.save(path);
  CHECK(Vocab::load(path) == v);
}

TEST_CASE("subsample") {
  TaskDataset ds;
  ds.id = "big";
  for (int i = 0; i < 23500; ++i) ds.train.push_back({std::to_string(i), "t", std::nullopt, {}, i % 2, 0});
  ds.dev.push_back({"dev0", "d", std::nullopt, {}, 0, 0});
  CHECK(subsample(ds, 0.001, 1).train.size() == 23);
  CHECK(subsample(ds, 0.01, 1).train.size() == 235);
  CHECK(subsample(ds, 0.1, 1).train.size() == 2350);
  CHECK(subsample(ds, 1e-9, 1).train.size() == 1);
  CHECK(subsample(ds, 0.001, 1).dev.size() == 1);
  CHECK_THROWS_AS(subsample(ds, 0.0, 1), Error);

  const auto full = subsample(ds, 1.0, 5);
  CHECK(full.train.size() == ds.train.size());

  auto ids = [](const TaskDataset& d) {
    std::set<std::string> s;
    for (const auto& e : d.train) s.insert(e.id);
    return s;
  };
  CHECK(ids(subsample(ds, 0.01, 9)) == ids(subsample(ds, 0.01, 9)));

  TaskDataset k;
  k.id = "k";
  for (int i = 0; i < 1000; ++i) k.train.push_back({std::to_string(i), "t", std::nullopt, {}, 0, 0});
  const auto s1 = ids(subsample(k, 0.1, 1));
  const auto s2 = ids(subsample(k, 0.1, 2));
  CHECK(s1.size() == 100);
  std::size_t overlap = 0;
  for (const auto& id : s1) overlap += s2.count(id);
  // Hypergeometric: mean 10, variance 100 * 0.1 * 0.9 * 900/999 = 8.1.
  CHECK(std::abs(static_cast<double>(overlap) - 10.0) <= 3 * std::sqrt(8.1));
}

TEST_CASE("sinusoid family") {
  CHECK(sinusoid_value(1, 0, 0) == 0.0);
  CHECK(sinusoid_value(2, std::numbers::pi / 2, 0) == 2.0);
  const auto fam = gen_sinusoid_family(5, 10, 7, 20);
  REQUIRE(fam.size() == 5);
  for (const auto& t : fam) {
    CHECK(t.train.size() == 10);
    CHECK(t.dev.size() == 20);
    const double a = t.metadata.at("amplitude"), ph = t.metadata.at("phase");
    CHECK(a >= 0.1);
    CHECK(a <= 5.0);
    CHECK(ph >= 0);
    CHECK(ph <= std::numbers::pi);
    for (const auto& e : t.train) {
      CHECK(std::abs(e.features[0]) <= 5.0);
      CHECK(e.target == sinusoid_value(a, ph, e.features[0]));
    }
    t.validate();
  }
  const auto again = gen_sinusoid_family(5, 10, 7, 20);
  for (std::size_t i = 0; i < 5; ++i) CHECK(same_examples(fam[i].train, again[i].train));
}

TEST_CASE("text family") {
  TextFamilyOptions o;
  const auto fam = gen_text_cls_family(6, 200, 101, 3, o);
  REQUIRE(fam.size() == 6);
  for (const auto& t : fam) {
    t.validate();
    std::set<std::string> positive_words;
    for (std::size_t g = 0; g < o.groups; ++g)
      if (t.metadata.count("positive_group_" + std::to_string(g)))
        for (std::size_t j = 0; j < o.words_per_group; ++j) positive_words.insert(family_keyword(o, g, j));
    CHECK(positive_words.size() == o.positive_groups * o.words_per_group);
    int ones = 0;
    for (const auto* split : {&t.train, &t.dev}) {
      for (const auto& e : *split) {
        bool has = false;
        for (const auto& w : split_words(e.text_a)) has |= positive_words.count(w) > 0;
        CHECK(has == (e.label == 1));
      }
    }
    for (const auto& e : t.train) ones += e.label;
    CHECK(std::abs(2 * ones - 101) <= 1);
  }
  const auto again = gen_text_cls_family(6, 200, 101, 3, o);
  for (std::size_t i = 0; i < 6; ++i) CHECK(same_examples(fam[i].train, again[i].train));
}

TEST_CASE("metrics") {
  const std::vector<int> gold{1, 0, 1, 1, 0, 0};
  const std::vector<int> pred{1, 0, 0, 1, 0, 1};
  CHECK(accuracy(pred, gold) == doctest::Approx(4.0 / 6));
  // Binary MCC = (tp tn - fp fn) / sqrt(...) with tp=2, tn=2, fp=1, fn=1.
  CHECK(matthews(pred, gold, 2) == doctest::Approx((4.0 - 1.0) / std::sqrt(3.0 * 3 * 3 * 3)));
  CHECK(matthews(gold, gold, 2) == doctest::Approx(1.0));
  const std::vector<int> constant(6, 1);
  CHECK(matthews(constant, gold, 2) == 0.0);
  const std::vector<double> x{1, 2, 3, 4}, y{2, 4, 6, 8}, z{4, 3, 2, 1};
  CHECK(pearson(x, y) == doctest::Approx(1.0));
  CHECK(pearson(x, z) == doctest::Approx(-1.0));
  CHECK(mean_squared_error(x, y) == doctest::Approx((1 + 4 + 9 + 16) / 4.0));
  CHECK_THROWS_AS(accuracy(std::vector<int>{}, std::vector<int>{}), Error);
}

TEST_CASE("a single-task model learns the keyword rule") {
  TextFamilyOptions o;
  auto fam = gen_text_cls_family(1, 120, 800, 21, o);
  std::vector<std::string> corpus;
  for (const auto& e : fam[0].train) corpus.push_back(e.text_a);
  const Vocab vocab = Vocab::build(corpus);
  ModelAssembly a;
  a.encoder.kind = EncoderKind::mlp;
  a.encoder.input = InputMode::token_sequence;
  a.encoder.vocab_size = vocab.size();
  a.encoder.hidden = 32;
  a.encoder.layers = 1;
  a.encoder.max_seq_len = 32;
  a.heads[fam[0].id] = fam[0].head_spec(0.0);
  auto table = std::make_shared<TaskTable>();
  (*table)[fam[0].id] = encode_task(fam[0], InputMode::token_sequence, &vocab, 32);
  FineTuneConfig ft;
  ft.lr = 0.01;
  ft.epochs = 6;
  ft.batch_size = 16;
  ft.seed = 2;
  std::vector<std::size_t> train(fam[0].train.size());
  std::iota(train.begin(), train.end(), std::size_t{0});
  const auto& task = table->at(fam[0].id);
  const auto result = fine_tune(init_params(a, 5), supervised_objective(a, table), fam[0].id, train, ft,
                                [&](const ParamSet& p) { return evaluate(a, p, task, task.dev); });
  CHECK(result.history.back().dev_metric >= 0.95);
}
