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

#include "common/error.hpp"
#include "stockpred/baselines.hpp"
#include "stockpred/cache.hpp"
#include "stockpred/data.hpp"
#include "stockpred/model.hpp"
#include "stockpred/synthetic.hpp"
#include "support/stock_fixture.hpp"

using namespace metaloop;
using namespace metaloop::stock;
namespace mt = metaloop::testing;
namespace fs = std::filesystem;

namespace {

StockModelSpec small_spec(std::size_t vocab, std::size_t lag) {
  StockModelSpec s;
  s.text.kind = EncoderKind::mlp;
  s.text.input = InputMode::token_sequence;
  s.text.vocab_size = vocab;
  s.text.hidden = 8;
  s.text.layers = 1;
  s.day_dim = 6;
  s.rnn_hidden = 5;
  s.lag = lag;
  s.dropout = 0.1;
  return s;
}

}  // namespace

TEST_CASE("timestamps") {
  CHECK(parse_timestamp("2014-01-06T10:00:00") == parse_timestamp("Mon Jan 06 10:00:00 +0000 2014"));
  CHECK(parse_timestamp("2014-01-06T10:00:00+01:00") == parse_timestamp("2014-01-06T09:00:00"));
  CHECK(parse_timestamp("2014-01-06T10:00:00.250Z") == parse_timestamp("2014-01-06 10:00:00"));
  CHECK(parse_timestamp("2014-01-06T10:00:00Z", -300) == parse_timestamp("2014-01-06T05:00:00"));
  CHECK_THROWS_AS(parse_timestamp("yesterday"), Error);
  CHECK_THROWS_AS(parse_timestamp("2014-02-30T10:00:00"), Error);
  CHECK(format_date(parse_date("2014-01-06")) == "2014-01-06");
}

TEST_CASE("alignment to trading days") {
  const auto prices = mt::fixture_prices();
  const auto a = align_tweets_to_days(mt::fixture_tweets(), prices.calendar());
  CHECK(a.dropped == 1);
  REQUIRE(a.bags.size() == 10);
  CHECK(a.bags[0] == std::vector<std::string>{"a", "b", "f"});
  CHECK(a.bags[1] == std::vector<std::string>{"c"});
  CHECK(a.bags[4] == std::vector<std::string>{"e"});
  CHECK(a.bags[5] == std::vector<std::string>{"d"});
  for (int i : {2, 3, 6, 7, 8, 9}) CHECK(a.bags[static_cast<std::size_t>(i)].empty());
}

TEST_CASE("label rule") {
  CHECK(label_movement(100, 100, 1e-9) == Movement::flat);
  CHECK(label_movement(100, 102, 0.005) == Movement::up);
  CHECK(label_movement(100, 99.7, 0.005) == Movement::flat);
  CHECK(label_movement(100, 99, 0.005) == Movement::down);
  CHECK_THROWS_AS(label_movement(0, 1, 0.005), Error);
}

TEST_CASE("windows on the hand-built series") {
  const auto prices = mt::fixture_prices();
  const auto a = align_tweets_to_days(mt::fixture_tweets(), prices.calendar());
  const auto ternary = build_windows(prices, a, 3, 0.005, LabelMode::ternary);
  const auto expected = mt::fixture_expected_windows();
  REQUIRE(ternary.windows.size() == expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i) {
    const auto& w = ternary.windows[i];
    CHECK(w.anchor == expected[i].anchor);
    CHECK(w.days == expected[i].days);
    CHECK(w.movement == expected[i].movement);
    REQUIRE(w.prices.size() == 4);
    for (std::size_t k = 0; k < 4; ++k) CHECK(w.prices[k] == prices.points[w.anchor - 3 + k].close);
  }
  const auto binary = build_windows(prices, a, 3, 0.005, LabelMode::binary);
  CHECK(binary.windows.size() == 4);
  CHECK(binary.dropped_flat == 2);
  CHECK(binary.windows.size() + binary.dropped_flat == ternary.windows.size());
  std::vector<int> labels;
  for (const auto& w : binary.windows) labels.push_back(w.label);
  CHECK(labels == std::vector<int>{1, 0, 1, 0});

  // Boundary: exactly T + 2 days gives one window; shorter gives a warning.
  PriceSeries five = prices;
  five.points.resize(5);
  Alignment a5;
  a5.bags.resize(5);
  CHECK(build_windows(five, a5, 3, 0.005, LabelMode::ternary).windows.size() == 1);
  PriceSeries four = prices;
  four.points.resize(4);
  a5.bags.resize(4);
  const auto short_build = build_windows(four, a5, 3, 0.005, LabelMode::ternary);
  CHECK(short_build.windows.empty());
  CHECK(short_build.warning.has_value());

  PriceSeries calm = prices;
  for (auto& p : calm.points) p.close = 100.0;
  Alignment empty;
  empty.bags.resize(10);
  CHECK(build_windows(calm, empty, 3, 0.005, LabelMode::binary).windows.empty());
}

TEST_CASE("price series validation") {
  auto s = mt::fixture_prices();
  s.points[3].close = -1;
  CHECK_THROWS_AS(s.validate(), Error);
  s = mt::fixture_prices();
  std::swap(s.points[2], s.points[3]);
  CHECK_THROWS_AS(s.validate(), Error);
}

TEST_CASE("baselines") {
  std::vector<int> balanced(1000);
  for (std::size_t i = 0; i < balanced.size(); ++i) balanced[i] = static_cast<int>(i % 2);
  const double acc = rand_baseline(balanced, 2, 4);
  CHECK(std::abs(acc - 0.5) <= 0.047);

  PriceSeries alt;
  alt.symbol = "ALT";
  const auto cal = weekday_calendar(parse_date("2014-01-02"), 60);
  for (std::size_t i = 0; i < cal.size(); ++i) alt.points.push_back({cal[i], i % 2 ? 101.0 : 100.0});
  Alignment none;
  none.bags.resize(cal.size());
  const auto w = build_windows(alt, none, 3, 0.005, LabelMode::binary);
  CHECK(w.windows.size() == 56);
  const auto model = fit_ar(log_returns(alt), 1);
  CHECK(model.coefficients[0] == doctest::Approx(-1.0));
  CHECK(ar_baseline(alt, 1, w.windows, 30, LabelMode::binary, 0.005) == 1.0);

  PriceSeries iid;
  iid.symbol = "IID";
  Rng rng(12);
  double p = 100;
  const auto cal2 = weekday_calendar(parse_date("2014-01-02"), 2000);
  for (const auto& d : cal2) {
    iid.points.push_back({d, p});
    p *= std::exp(0.02 * rng.normal());
  }
  Alignment none2;
  none2.bags.resize(cal2.size());
  auto all = build_windows(iid, none2, 3, 0.0, LabelMode::binary).windows;
  std::vector<StockWindow> held(all.begin() + 1000, all.end());
  const double ar = ar_baseline(iid, 2, held, 1000, LabelMode::binary, 0.0);
  const double sigma = std::sqrt(0.25 / static_cast<double>(held.size()));
  CHECK(std::abs(ar - 0.5) <= 3 * sigma);

  CHECK_THROWS_AS(fit_ar(std::vector<double>{0.1, 0.2}, 1), Error);
}

TEST_CASE("stock forward") {
  const Vocab vocab = Vocab::build({"good news", "bad news", "flat day"});
  const auto spec = small_spec(vocab.size(), 2);
  const ParamSet p = init_stock_params(spec, 3);
  CHECK(p.bit_equal(init_stock_params(spec, 3)));

  StockWindow blank;
  blank.symbol = "X";
  blank.days.resize(2);
  blank.prices = {100, 100, 100};
  const auto e1 = encode_window(blank, vocab, spec);
  const auto e2 = encode_window(blank, vocab, spec);
  const auto l1 = stock_forward(spec, p, e1, ForwardMode::eval, RngStream(1));
  CHECK(l1.shape() == ad::Shape{1, 2});
  CHECK(l1.values() == stock_forward(spec, p, e2, ForwardMode::eval, RngStream(2)).values());

  StockWindow w;
  w.symbol = "X";
  w.days = {{"good news"}, {"bad news", "flat day"}};
  w.prices = {100, 101, 99};
  StockWindow swapped = w;
  std::swap(swapped.days[0], swapped.days[1]);
  swapped.prices = {100, 98.0198, 99};
  const auto ew = encode_window(w, vocab, spec);
  const auto es = encode_window(swapped, vocab, spec);
  CHECK(stock_forward(spec, p, ew, ForwardMode::eval, RngStream(0)).values() !=
        stock_forward(spec, p, es, ForwardMode::eval, RngStream(0)).values());

  // Batched and single forwards agree.
  const EncodedWindow* both[] = {&ew, &es};
  const auto batched = stock_forward(spec, p, both, ForwardMode::eval, RngStream(0));
  const auto single = stock_forward(spec, p, es, ForwardMode::eval, RngStream(0));
  CHECK(batched[2] == doctest::Approx(single[0]).epsilon(1e-12));
  CHECK(batched[3] == doctest::Approx(single[1]).epsilon(1e-12));

  const auto spec1 = small_spec(vocab.size(), 1);
  StockWindow one;
  one.symbol = "X";
  one.days = {{"good news"}};
  one.prices = {100, 101};
  CHECK(stock_forward(spec1, init_stock_params(spec1, 1), encode_window(one, vocab, spec1),
                      ForwardMode::eval, RngStream(0))
            .shape() == ad::Shape{1, 2});
  CHECK_THROWS_AS(encode_window(one, vocab, spec), Error);
}

TEST_CASE("synthetic family is deterministic and causal") {
  SyntheticStockOptions o;
  o.days = 120;
  const auto a = gen_stock_family(3, 5, o);
  const auto b = gen_stock_family(3, 5, o);
  REQUIRE(a.size() == 3);
  for (std::size_t s = 0; s < 3; ++s) {
    CHECK(a[s].tweets.size() == b[s].tweets.size());
    for (std::size_t i = 0; i < a[s].prices.points.size(); ++i)
      CHECK(a[s].prices.points[i].close == b[s].prices.points[i].close);
    a[s].prices.validate();
    for (const auto& [word, eff] : a[s].effects)
      if (word.rfind("bull", 0) == 0) CHECK(eff > 0);
      else if (word.rfind("bear", 0) == 0) CHECK(eff < 0);
  }
}

TEST_CASE("maml over stocks with one stock and K=0") {
  SyntheticStockOptions o;
  o.days = 60;
  const auto fam = gen_stock_family(2, 9, o);
  std::vector<std::string> corpus;
  for (const auto& t : fam[0].tweets) corpus.push_back(t.text);
  const Vocab vocab = Vocab::build(corpus);
  const auto spec = small_spec(vocab.size(), 3);
  auto table = std::make_shared<StockTable>();
  for (const auto& st : fam) {
    const auto align = align_tweets_to_days(st.tweets, st.prices.calendar());
    (*table)[st.prices.symbol] =
        encode_windows(build_windows(st.prices, align, 3, 0.005, LabelMode::binary).windows, vocab, spec);
  }
  MetaConfig cfg;
  cfg.inner_steps = 0;
  cfg.meta_batch = 2;
  cfg.support_size = 4;
  cfg.query_size = 4;
  cfg.epochs = 1;
  cfg.steps_per_epoch = 3;
  cfg.outer_lr = 0.01;
  const ParamSet init = init_stock_params(spec, 1);
  const auto m = maml_over_stocks(spec, init, table, cfg, TrainMode::meta);
  const auto j = maml_over_stocks(spec, init, table, cfg, TrainMode::joint);
  CHECK(m.params.bit_equal(j.params));

  auto single = std::make_shared<StockTable>();
  (*single)["S0"] = table->at("S0");
  cfg.inner_steps = 1;
  cfg.inner_lr = 0.1;
  const auto one = maml_over_stocks(spec, init, single, cfg);
  CHECK(one.steps == 3);
  CHECK_FALSE(one.params.bit_equal(init));
}

TEST_CASE("window cache round trip and invalidation") {
  const auto prices = mt::fixture_prices();
  const auto a = align_tweets_to_days(mt::fixture_tweets(), prices.calendar());
  const auto built = build_windows(prices, a, 3, 0.005, LabelMode::ternary);
  const Vocab vocab = Vocab::build({"a b c d e f"});
  auto spec = small_spec(vocab.size(), 3);
  spec.classes = 3;
  PreparedData data;
  data.config_hash = "abc";
  data.lag = 3;
  data.vocab = vocab;
  PreparedStock s;
  s.symbol = "FIX";
  s.windows = encode_windows(built.windows, vocab, spec);
  for (const auto& w : built.windows) {
    s.anchors.push_back(w.anchor);
    s.prices.push_back(w.prices);
  }
  s.dropped_tweets = a.dropped;
  data.stocks.push_back(s);
  const auto dir = fs::temp_directory_path() / "metaloop_stock_cache";
  fs::remove_all(dir);
  save_prepared(dir.string(), data);
  CHECK_FALSE(load_prepared(dir.string(), "other").has_value());
  const auto back = load_prepared(dir.string(), "abc");
  REQUIRE(back.has_value());
  CHECK(back->vocab == vocab);
  REQUIRE(back->stocks.size() == 1);
  const auto& bs = back->stocks[0];
  CHECK(bs.anchors == s.anchors);
  CHECK(bs.prices == s.prices);
  CHECK(bs.dropped_tweets == 1);
  for (std::size_t i = 0; i < s.windows.size(); ++i) {
    CHECK(bs.windows[i].days == s.windows[i].days);
    CHECK(bs.windows[i].price_feature == s.windows[i].price_feature);
    CHECK(bs.windows[i].empty_day == s.windows[i].empty_day);
    CHECK(bs.windows[i].label == s.windows[i].label);
  }
  fs::remove_all(dir);
}

TEST_CASE("price and tweet loaders") {
  const auto dir = fs::temp_directory_path() / "metaloop_stock_io";
  fs::create_directories(dir);
  std::ofstream(dir / "p.csv") << "date,open,close\n2014-01-02,1,10.5\n2014-01-03,1,11\n";
  const auto s = load_prices((dir / "p.csv").string(), "P");
  REQUIRE(s.points.size() == 2);
  CHECK(s.points[1].close == 11.0);
  std::ofstream(dir / "t.jsonl") << "{\"created_at\":\"Thu Jan 02 10:00:00 +0000 2014\",\"text\":\"hi\"}\n"
                                 << "{\"created_at\":\"never\",\"text\":\"x\"}\n";
  CHECK_THROWS_AS(load_tweets((dir / "t.jsonl").string(), "P", 0, false), Error);
  std::size_t skipped = 0;
  CHECK(load_tweets((dir / "t.jsonl").string(), "P", 0, true, &skipped).size() == 1);
  CHECK(skipped == 1);
  fs::remove_all(dir);
}
