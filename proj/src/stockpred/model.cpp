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

#include "stockpred/model.hpp"

#include <algorithm>
#include <cmath>

#include "autodiff/ops.hpp"
#include "common/error.hpp"

namespace metaloop::stock {

namespace {

std::string name(std::string_view suffix) { return std::string(kStockPrefix) + std::string(suffix); }
std::string enc_prefix() { return name("enc/"); }

void add_linear(std::vector<NamedTensor>& out, const std::string& prefix, std::size_t in,
                std::size_t outd, const RngStream& stream) {
  out.push_back({prefix + "w", ad::Tensor::parameter({in, outd}, glorot_uniform(in, outd, stream.child(prefix + "w")))});
  out.push_back({prefix + "b", ad::Tensor::parameter({outd}, std::vector<double>(outd, 0.0))});
}

ad::Tensor linear(const ParamSet& p, const std::string& prefix, const ad::Tensor& x, std::size_t in,
                  std::size_t outd) {
  return ad::add(ad::matmul(x, param(p, prefix + "w", {in, outd})), param(p, prefix + "b", {outd}));
}

}  // namespace

void StockModelSpec::validate() const {
  if (text.input != InputMode::token_sequence)
    fail(ErrorKind::config, "stock.text encoder must take token sequences");
  text.validate();
  if (lag < 1) fail(ErrorKind::config, "stock.lag must be >= 1");
  if (classes != 2 && classes != 3) fail(ErrorKind::config, "stock.classes must be 2 or 3");
  if (day_dim < 1 || rnn_hidden < 1) fail(ErrorKind::config, "stock dims must be >= 1");
  if (!(dropout >= 0 && dropout < 1)) fail(ErrorKind::config, "stock.dropout must be in [0, 1)");
  if (max_tweets_per_day < 1 || max_tweet_len < 1)
    fail(ErrorKind::config, "stock tweet caps must be >= 1");
}

EncodedWindow encode_window(const StockWindow& w, const Vocab& vocab, const StockModelSpec& spec) {
  if (w.days.size() != spec.lag || w.prices.size() != spec.lag + 1)
    fail(ErrorKind::shape, w.symbol + ": window at anchor " + std::to_string(w.anchor) +
                               " does not match lag " + std::to_string(spec.lag));
  EncodedWindow e;
  e.label = w.label;
  for (std::size_t i = 0; i < spec.lag; ++i) {
    std::vector<std::vector<int>> bag;
    for (const auto& text : w.days[i]) {
      if (bag.size() >= spec.max_tweets_per_day) break;
      auto ids = encode_text(vocab, text, std::nullopt, spec.max_tweet_len);
      if (!ids.empty()) bag.push_back(std::move(ids));
    }
    e.empty_day.push_back(bag.empty() ? 1.0 : 0.0);
    e.days.push_back(std::move(bag));
    // Previous-day log return in percent, or the close relative to p_{t-T}.
    e.price_feature.push_back(spec.raw_price ? w.prices[i + 1] / w.prices[0]
                                             : 100.0 * std::log(w.prices[i + 1] / w.prices[i]));
  }
  return e;
}

std::vector<EncodedWindow> encode_windows(const std::vector<StockWindow>& ws, const Vocab& vocab,
                                          const StockModelSpec& spec) {
  std::vector<EncodedWindow> out;
  out.reserve(ws.size());
  for (const auto& w : ws) out.push_back(encode_window(w, vocab, spec));
  return out;
}

ParamSet init_stock_params(const StockModelSpec& spec, std::uint64_t seed) {
  spec.validate();
  const RngStream root(seed, "init");
  std::vector<NamedTensor> out = init_encoder(spec.text, enc_prefix(), root);
  const std::size_t h = spec.rnn_hidden, in = spec.day_input_dim();
  add_linear(out, name("day/"), spec.text.output_dim(), spec.day_dim, root);
  for (const char* gate : {"z", "r", "h"}) {
    const std::string g = name("gru/") + gate + "/";
    out.push_back({g + "wx", ad::Tensor::parameter({in, h}, glorot_uniform(in, h, root.child(g + "wx")))});
    out.push_back({g + "wh", ad::Tensor::parameter({h, h}, glorot_uniform(h, h, root.child(g + "wh")))});
    out.push_back({g + "b", ad::Tensor::parameter({h}, std::vector<double>(h, 0.0))});
  }
  add_linear(out, name("head/"), h, spec.classes, root);
  return ParamSet(std::move(out));
}

ad::Tensor stock_forward(const StockModelSpec& spec, const ParamSet& params,
                         std::span<const EncodedWindow* const> windows, ForwardMode mode,
                         const RngStream& stream) {
  const std::size_t batch = windows.size(), T = spec.lag, d = spec.day_dim, h = spec.rnn_hidden;
  if (batch == 0) fail(ErrorKind::invalid_argument, "stock_forward on an empty batch");

  // Gather every tweet, remembering which (day, window) slot it belongs to.
  // Slots are day-major: row i * batch + b.
  ModelInput tweets;
  std::vector<std::size_t> slot_of_tweet;
  std::vector<double> slot_count(T * batch, 0.0);
  for (std::size_t b = 0; b < batch; ++b) {
    const EncodedWindow& w = *windows[b];
    if (w.days.size() != T || w.price_feature.size() != T || w.empty_day.size() != T)
      fail(ErrorKind::shape, "window does not match lag " + std::to_string(T));
    for (std::size_t i = 0; i < T; ++i) {
      for (const auto& ids : w.days[i]) {
        tweets.tokens.push_back(ids);
        slot_of_tweet.push_back(i * batch + b);
        slot_count[i * batch + b] += 1;
      }
    }
  }

  ad::Tensor day_vectors = ad::Tensor::zeros({T * batch, d});
  if (!tweets.tokens.empty()) {
    const std::size_t m = tweets.tokens.size();
    const ad::Tensor enc = encode(spec.text, params, enc_prefix(), tweets);
    const ad::Tensor proj = ad::tanh(linear(params, name("day/"), enc, spec.text.output_dim(), d));
    std::vector<double> pool(T * batch * m, 0.0);
    for (std::size_t j = 0; j < m; ++j) {
      const std::size_t s = slot_of_tweet[j];
      pool[s * m + j] = 1.0 / slot_count[s];
    }
    day_vectors = ad::matmul(ad::Tensor::constant({T * batch, m}, std::move(pool)), proj);
  }

  const ad::Tensor& wxz = param(params, name("gru/z/wx"), {spec.day_input_dim(), h});
  const ad::Tensor& whz = param(params, name("gru/z/wh"), {h, h});
  const ad::Tensor& bz = param(params, name("gru/z/b"), {h});
  const ad::Tensor& wxr = param(params, name("gru/r/wx"), {spec.day_input_dim(), h});
  const ad::Tensor& whr = param(params, name("gru/r/wh"), {h, h});
  const ad::Tensor& br = param(params, name("gru/r/b"), {h});
  const ad::Tensor& wxh = param(params, name("gru/h/wx"), {spec.day_input_dim(), h});
  const ad::Tensor& whh = param(params, name("gru/h/wh"), {h, h});
  const ad::Tensor& bh = param(params, name("gru/h/b"), {h});

  ad::Tensor state = ad::Tensor::zeros({batch, h});
  for (std::size_t i = 0; i < T; ++i) {
    std::vector<double> extra(batch * 2);
    for (std::size_t b = 0; b < batch; ++b) {
      extra[2 * b] = windows[b]->price_feature[i];
      extra[2 * b + 1] = windows[b]->empty_day[i];
    }
    const std::vector<ad::Tensor> parts{ad::slice(day_vectors, 0, i * batch, (i + 1) * batch),
                                        ad::Tensor::constant({batch, 2}, std::move(extra))};
    const ad::Tensor x = ad::concat(parts, 1);
    const ad::Tensor z = ad::sigmoid(ad::add(ad::add(ad::matmul(x, wxz), ad::matmul(state, whz)), bz));
    const ad::Tensor r = ad::sigmoid(ad::add(ad::add(ad::matmul(x, wxr), ad::matmul(state, whr)), br));
    const ad::Tensor cand =
        ad::tanh(ad::add(ad::add(ad::matmul(x, wxh), ad::matmul(ad::mul(r, state), whh)), bh));
    // h' = h + z * (cand - h)
    state = ad::add(state, ad::mul(z, ad::sub(cand, state)));
  }
  const ad::Tensor dropped = ad::dropout(state, spec.dropout, stream.child("head_dropout"),
                                         mode == ForwardMode::train);
  return linear(params, name("head/"), dropped, h, spec.classes);
}

ad::Tensor stock_forward(const StockModelSpec& spec, const ParamSet& params,
                         const EncodedWindow& window, ForwardMode mode, const RngStream& stream) {
  const EncodedWindow* one[] = {&window};
  return stock_forward(spec, params, one, mode, stream);
}

TaskObjective stock_objective(const StockModelSpec& spec, std::shared_ptr<const StockTable> table) {
  return [spec, table](const ParamSet& params, const std::string& symbol,
                       std::span<const std::size_t> idx, ForwardMode mode, const RngStream& stream) {
    const auto it = table->find(symbol);
    if (it == table->end()) fail(ErrorKind::invalid_argument, "unknown stock '" + symbol + "'");
    std::vector<const EncodedWindow*> batch;
    std::vector<int> labels;
    for (std::size_t i : idx) {
      if (i >= it->second.size()) fail(ErrorKind::invalid_argument, "window index out of range");
      batch.push_back(&it->second[i]);
      labels.push_back(it->second[i].label);
    }
    return ad::cross_entropy(stock_forward(spec, params, batch, mode, stream), labels);
  };
}

double stock_accuracy(const StockModelSpec& spec, const ParamSet& params,
                      const std::vector<EncodedWindow>& windows, std::size_t batch) {
  if (windows.empty()) fail(ErrorKind::data, "accuracy over zero windows");
  ad::GradModeGuard no_grad(false);
  std::size_t right = 0;
  for (std::size_t start = 0; start < windows.size(); start += batch) {
    std::vector<const EncodedWindow*> part;
    for (std::size_t i = start; i < std::min(windows.size(), start + batch); ++i) part.push_back(&windows[i]);
    const ad::Tensor logits = stock_forward(spec, params, part, ForwardMode::eval, RngStream(0));
    const std::size_t k = spec.classes;
    for (std::size_t b = 0; b < part.size(); ++b) {
      const auto row = logits.data().subspan(b * k, k);
      const int pred = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
      right += pred == part[b]->label;
    }
  }
  return static_cast<double>(right) / static_cast<double>(windows.size());
}

TrainResult maml_over_stocks(const StockModelSpec& spec, const ParamSet& init,
                             std::shared_ptr<const StockTable> stocks, const MetaConfig& cfg,
                             TrainMode mode, const TrainHooks& hooks) {
  if (stocks->empty()) fail(ErrorKind::invalid_argument, "maml_over_stocks needs at least one stock");
  std::vector<TaskInfo> tasks;
  for (const auto& [symbol, windows] : *stocks) {
    if (windows.empty()) fail(ErrorKind::data, "stock " + symbol + " has no training windows");
    tasks.push_back({symbol, windows.size()});
  }
  return train_loop(mode, init, tasks, stock_objective(spec, stocks), cfg, hooks);
}

}  // namespace metaloop::stock
