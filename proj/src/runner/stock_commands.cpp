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

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <set>
#include <thread>
#include <atomic>

#include <json.hpp>

#include "autodiff/rng.hpp"
#include "common/error.hpp"
#include "runner/run.hpp"
#include "stockpred/baselines.hpp"
#include "stockpred/cache.hpp"
#include "stockpred/model.hpp"

namespace metaloop::runner {

namespace fs = std::filesystem;
using namespace metaloop::stock;

namespace {

struct RawStock {
  PriceSeries prices;
  std::vector<TweetRecord> tweets;
};

struct Roles {
  std::vector<std::string> train, held;
};

std::vector<RawStock> load_raw_stocks(const RunConfig& cfg) {
  const StockConfig& sc = cfg.stock;
  std::vector<RawStock> all;
  if (sc.source.synthetic) {
    for (auto& s : gen_stock_family(sc.source.synthetic_stocks, sc.source.synthetic_seed, *sc.source.synthetic))
      all.push_back({std::move(s.prices), std::move(s.tweets)});
  } else {
    std::vector<std::string> symbols = sc.source.symbols;
    if (symbols.empty()) {
      for (const auto& entry : fs::directory_iterator(sc.source.prices_dir))
        if (entry.path().extension() == ".csv") symbols.push_back(entry.path().stem().string());
      std::sort(symbols.begin(), symbols.end());
    }
    for (const auto& sym : symbols) {
      const fs::path prices = fs::path(sc.source.prices_dir) / (sym + ".csv");
      const fs::path tweets = fs::path(sc.source.tweets_dir) / (sym + ".jsonl");
      if (!fs::is_regular_file(prices)) fail(ErrorKind::io, "no price file for " + sym + ": " + prices.string());
      if (!fs::is_regular_file(tweets)) fail(ErrorKind::io, "no tweet file for " + sym + ": " + tweets.string());
      std::size_t skipped = 0;
      RawStock r{load_prices(prices.string(), sym),
                 load_tweets(tweets.string(), sym, sc.exchange_offset_minutes, cfg.skip_bad, &skipped)};
      if (skipped) std::cerr << "warning: skipped " << skipped << " bad tweet rows for " << sym << "\n";
      all.push_back(std::move(r));
    }
    return all;
  }
  if (sc.source.symbols.empty()) return all;
  std::vector<RawStock> picked;
  for (const auto& sym : sc.source.symbols) {
    const auto it = std::find_if(all.begin(), all.end(), [&](const RawStock& r) { return r.prices.symbol == sym; });
    if (it == all.end()) fail(ErrorKind::config, "config field 'stock.source.symbols': no stock '" + sym + "'");
    picked.push_back(*it);
  }
  return picked;
}

Roles stock_roles(const RunConfig& cfg, const std::vector<std::string>& symbols) {
  const StockConfig& sc = cfg.stock;
  const std::set<std::string> known(symbols.begin(), symbols.end());
  Roles r;
  r.held = sc.held_out;
  for (const auto& s : r.held)
    if (!known.count(s)) fail(ErrorKind::config, "config field 'stock.held_out': no stock '" + s + "'");
  const std::set<std::string> held(r.held.begin(), r.held.end());
  if (sc.train_symbols.empty()) {
    for (const auto& s : symbols)
      if (!held.count(s)) r.train.push_back(s);
  } else {
    for (const auto& s : sc.train_symbols) {
      if (!known.count(s)) fail(ErrorKind::config, "config field 'stock.train_symbols': no stock '" + s + "'");
      if (held.count(s)) fail(ErrorKind::config, "config field 'stock.train_symbols': '" + s + "' is also held out");
      r.train.push_back(s);
    }
  }
  if (r.train.empty()) fail(ErrorKind::config, "config field 'stock.train_symbols': no training stocks remain");
  return r;
}

std::string data_hash(const RunConfig& cfg) {
  const StockConfig& sc = cfg.stock;
  nlohmann::ordered_json j;
  j["format"] = 1;
  if (sc.source.synthetic) {
    const auto& o = *sc.source.synthetic;
    j["synthetic"] = {sc.source.synthetic_stocks, sc.source.synthetic_seed, o.days, o.shared_keywords,
                      o.own_keywords, o.filler_words, o.news_prob, o.max_tweets, o.effect,
                      o.effect_spread, o.noise, o.start};
  } else {
    j["prices_dir"] = sc.source.prices_dir;
    j["tweets_dir"] = sc.source.tweets_dir;
  }
  j["symbols"] = sc.source.symbols;
  j["train"] = sc.train_symbols;
  j["held_out"] = sc.held_out;
  j["lag"] = sc.lag;
  j["epsilon"] = sc.epsilon;
  j["labels"] = sc.labels == LabelMode::binary ? "binary" : "ternary";
  j["offset"] = sc.exchange_offset_minutes;
  j["vocab"] = {sc.vocab_size, sc.min_count};
  j["encode"] = {sc.raw_price, sc.max_tweets_per_day, sc.max_tweet_len};
  j["skip_bad"] = cfg.skip_bad;
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash_string(j.dump())));
  return buf;
}

StockModelSpec model_spec(const RunConfig& cfg, std::size_t vocab_size) {
  const StockConfig& sc = cfg.stock;
  StockModelSpec s;
  s.text.kind = sc.encoder;
  s.text.input = InputMode::token_sequence;
  s.text.vocab_size = vocab_size;
  s.text.hidden = sc.hidden;
  s.text.layers = sc.layers;
  s.text.heads = sc.heads;
  s.text.max_seq_len = sc.max_tweet_len;
  s.day_dim = sc.day_dim;
  s.rnn_hidden = sc.rnn_hidden;
  s.lag = sc.lag;
  s.classes = class_count(sc.labels);
  s.dropout = sc.dropout;
  s.raw_price = sc.raw_price;
  s.max_tweets_per_day = sc.max_tweets_per_day;
  s.max_tweet_len = sc.max_tweet_len;
  try {
    s.validate();
  } catch (const Error& e) {
    fail(ErrorKind::config, std::string("config field 'stock.model': ") + e.what());
  }
  return s;
}

WindowBuild build_of(const RunConfig& cfg, const RawStock& r, std::size_t* dropped_tweets) {
  const Alignment align = align_tweets_to_days(r.tweets, r.prices.calendar());
  if (dropped_tweets) *dropped_tweets = align.dropped;
  WindowBuild b = build_windows(r.prices, align, cfg.stock.lag, cfg.stock.epsilon, cfg.stock.labels);
  if (b.warning) std::cerr << "warning: " << r.prices.symbol << ": " << *b.warning << "\n";
  return b;
}

std::string cache_dir_of(const RunConfig& cfg) {
  return cfg.stock.cache_dir ? *cfg.stock.cache_dir : (fs::path(cfg.output_dir) / "stock_cache").string();
}

PreparedData prepare_stocks(const RunConfig& cfg, bool* reused) {
  const std::string hash = data_hash(cfg);
  const std::string dir = cache_dir_of(cfg);
  if (auto cached = load_prepared(dir, hash)) {
    if (reused) *reused = true;
    return std::move(*cached);
  }
  if (reused) *reused = false;
  const std::vector<RawStock> raw = load_raw_stocks(cfg);
  std::vector<std::string> symbols;
  for (const auto& r : raw) symbols.push_back(r.prices.symbol);
  const Roles roles = stock_roles(cfg, symbols);
  const std::set<std::string> train(roles.train.begin(), roles.train.end());

  PreparedData data;
  data.config_hash = hash;
  data.lag = cfg.stock.lag;
  std::vector<std::string> corpus;
  for (const auto& r : raw)
    if (train.count(r.prices.symbol))
      for (const auto& t : r.tweets) corpus.push_back(t.text);
  data.vocab = Vocab::build(corpus, cfg.stock.vocab_size, cfg.stock.min_count);
  const StockModelSpec spec = model_spec(cfg, data.vocab.size());

  // Each stock is independent up to the final, ordered, collection.
  data.stocks.resize(raw.size());
  std::vector<std::exception_ptr> errors(raw.size());
  const std::size_t workers = std::min<std::size_t>(worker_count(), raw.size());
  std::vector<std::thread> pool;
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i; (i = next++) < raw.size();) {
      try {
        PreparedStock& ps = data.stocks[i];
        ps.symbol = raw[i].prices.symbol;
        const WindowBuild b = build_of(cfg, raw[i], &ps.dropped_tweets);
        const std::vector<StockWindow>& ws = b.windows;
        ps.dropped_flat = b.dropped_flat;
        for (const auto& w : ws) {
          ps.anchors.push_back(w.anchor);
          ps.prices.push_back(w.prices);
        }
        ps.windows = encode_windows(ws, data.vocab, spec);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  save_prepared(dir, data);
  return data;
}

const PreparedStock& stock_named(const PreparedData& data, const std::string& symbol) {
  for (const auto& s : data.stocks)
    if (s.symbol == symbol) return s;
  fail(ErrorKind::data, "stock " + symbol + " missing from the prepared data");
}

struct HeldSplit {
  std::string symbol;
  std::vector<EncodedWindow> adapt, test;
};

HeldSplit held_split(const RunConfig& cfg, const PreparedStock& s) {
  const std::size_t n = s.windows.size();
  const std::size_t k = cfg.stock.adapt_windows;
  if (n <= k)
    fail(ErrorKind::data, "held-out stock " + s.symbol + " has " + std::to_string(n) +
                              " windows; stock.adapt_windows=" + std::to_string(k) + " leaves none to score");
  return {s.symbol, {s.windows.begin(), s.windows.begin() + static_cast<std::ptrdiff_t>(k)},
          {s.windows.begin() + static_cast<std::ptrdiff_t>(k), s.windows.end()}};
}

double adapted_accuracy(const RunConfig& cfg, const StockModelSpec& spec, const ParamSet& params,
                        const HeldSplit& h) {
  auto table = std::make_shared<StockTable>();
  (*table)[h.symbol] = h.adapt;
  MetaConfig adapt = cfg.meta;
  adapt.inner_steps = static_cast<int>(cfg.stock.adapt_steps);
  std::vector<std::size_t> support(h.adapt.size());
  std::iota(support.begin(), support.end(), std::size_t{0});
  const ParamSet adapted = inner_adapt(params, stock_objective(spec, table), h.symbol, support, adapt, false);
  return stock_accuracy(spec, adapted, h.test);
}

}  // namespace

StockPrepSummary cmd_stock_prep(const RunConfig& cfg) {
  require_mode(cfg, {RunMode::stock_meta, RunMode::stock_baseline}, "stock-prep");
  StockPrepSummary out;
  out.cache_dir = cache_dir_of(cfg);
  const PreparedData data = prepare_stocks(cfg, &out.reused);
  for (const auto& s : data.stocks) out.windows.emplace_back(s.symbol, s.windows.size());
  return out;
}

RunRecord cmd_stock_train(const RunConfig& cfg) {
  require_mode(cfg, {RunMode::stock_meta}, "stock-train");
  return run_in_context(cfg, [&](RunContext& run) {
    const PreparedData data = prepare_stocks(cfg, nullptr);
    data.vocab.save(run.path("vocab.txt"));
    const StockModelSpec spec = model_spec(cfg, data.vocab.size());
    std::vector<std::string> symbols;
    for (const auto& s : data.stocks) symbols.push_back(s.symbol);
    const Roles roles = stock_roles(cfg, symbols);

    auto table = std::make_shared<StockTable>();
    std::map<std::string, std::vector<EncodedWindow>> dev;
    for (const auto& sym : roles.train) {
      const auto& ws = stock_named(data, sym).windows;
      const std::size_t n_dev = static_cast<std::size_t>(std::floor(static_cast<double>(ws.size()) * cfg.stock.dev_fraction));
      if (ws.size() <= n_dev) fail(ErrorKind::data, "stock " + sym + " has no training windows");
      (*table)[sym] = {ws.begin(), ws.end() - static_cast<std::ptrdiff_t>(n_dev)};
      if (n_dev) dev[sym] = {ws.end() - static_cast<std::ptrdiff_t>(n_dev), ws.end()};
    }
    std::vector<HeldSplit> held;
    for (const auto& sym : roles.held) held.push_back(held_split(cfg, stock_named(data, sym)));

    const ParamSet init = init_stock_params(spec, cfg.seed);
    double loss_sum = 0;
    std::int64_t loss_count = 0, last_step = 0;
    BestTracker best;
    TrainHooks hooks;
    hooks.on_step = [&](std::int64_t step, const StepResult& r) {
      loss_sum += r.loss;
      ++loss_count;
      last_step = step;
    };
    hooks.on_epoch = [&](int epoch, const ParamSet& params, const AdamaxState& state) {
      run.log(last_step, "*", "train", cfg.stock.train_mode == TrainMode::meta ? "meta_loss" : "loss",
              loss_count ? loss_sum / static_cast<double>(loss_count) : 0.0);
      loss_sum = 0;
      loss_count = 0;
      double dev_sum = 0;
      for (const auto& [sym, ws] : dev) {
        const double acc = stock_accuracy(spec, params, ws);
        run.log(last_step, sym, "dev", "accuracy", acc);
        dev_sum += acc;
      }
      for (const auto& h : held) run.log(last_step, h.symbol, "test", "accuracy", adapted_accuracy(cfg, spec, params, h));
      char name[32];
      std::snprintf(name, sizeof name, "epoch_%03d", epoch);
      run.checkpoint(name, params, &state);
      if (!dev.empty() && best.offer(dev_sum / static_cast<double>(dev.size()))) run.checkpoint("best", params, &state);
    };
    const TrainResult result = maml_over_stocks(spec, init, table, cfg.meta, cfg.stock.train_mode, hooks);
    run.checkpoint("final", result.params, &result.state);
  });
}

RunRecord cmd_baseline(const RunConfig& cfg) {
  require_mode(cfg, {RunMode::stock_baseline}, "baseline");
  return run_in_context(cfg, [&](RunContext& run) {
    const PreparedData data = prepare_stocks(cfg, nullptr);
    const StockModelSpec spec = model_spec(cfg, data.vocab.size());
    const std::vector<RawStock> raw = load_raw_stocks(cfg);
    std::ofstream csv(run.path("baselines.csv"), std::ios::binary);
    csv << "symbol,method,accuracy,seed\n";
    const std::string ar_name = "ar" + std::to_string(cfg.stock.ar_order);
    for (const auto& sym : cfg.stock.held_out) {
      const HeldSplit h = held_split(cfg, stock_named(data, sym));
      const auto it = std::find_if(raw.begin(), raw.end(), [&](const RawStock& r) { return r.prices.symbol == sym; });
      if (it == raw.end()) fail(ErrorKind::data, "no raw data for held-out stock " + sym);
      const std::vector<StockWindow> all = build_of(cfg, *it, nullptr).windows;
      const std::vector<StockWindow> test(all.begin() + static_cast<std::ptrdiff_t>(cfg.stock.adapt_windows), all.end());
      std::vector<int> labels;
      for (const auto& w : test) labels.push_back(w.label);
      // Fit on prices up to the first scored anchor only.
      const double ar = ar_baseline(it->prices, cfg.stock.ar_order, test, test.front().anchor + 1, cfg.stock.labels,
                                    cfg.stock.epsilon);
      const double rnd = rand_baseline(labels, class_count(cfg.stock.labels), cfg.seed);
      const double scratch = adapted_accuracy(cfg, spec, init_stock_params(spec, cfg.seed), h);
      for (const auto& [method, acc] : std::vector<std::pair<std::string, double>>{
               {"rand", rnd}, {ar_name, ar}, {"scratch", scratch}}) {
        run.log(0, sym, "test", method + "_accuracy", acc);
        csv << sym << ',' << method << ',' << format_real(acc) << ',' << cfg.seed << '\n';
      }
    }
    if (!csv) fail(ErrorKind::io, "write failed on " + run.path("baselines.csv"));
  });
}

}  // namespace metaloop::runner
