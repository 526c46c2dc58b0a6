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

#ifndef METALOOP_STOCKPRED_MODEL_HPP
#define METALOOP_STOCKPRED_MODEL_HPP

#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "meta/meta.hpp"
#include "models/model.hpp"
#include "stockpred/data.hpp"
#include "tasks/text.hpp"

namespace metaloop::stock {

/// Tweet encoder -> per-day mean of projected tweet vectors -> GRU over
/// the T days -> dropout -> linear head.
struct StockModelSpec {
  EncoderSpec text;  // token_sequence input
  std::size_t day_dim = 32;
  std::size_t rnn_hidden = 64;
  std::size_t lag = 5;
  std::size_t classes = 2;
  double dropout = 0.1;
  // Feed p_i / p_{t-T} instead of the previous-day log return.
  bool raw_price = false;
  std::size_t max_tweets_per_day = 16;
  std::size_t max_tweet_len = 32;

  void validate() const;
  std::size_t day_input_dim() const { return day_dim + 2; }
};

inline constexpr std::string_view kStockPrefix = "stock/";

/// Model-ready window: token ids per tweet per day, one price feature and
/// one empty-day flag per day.
struct EncodedWindow {
  std::vector<std::vector<std::vector<int>>> days;
  std::vector<double> price_feature;
  std::vector<double> empty_day;
  int label = 0;
};

EncodedWindow encode_window(const StockWindow& w, const Vocab& vocab, const StockModelSpec& spec);
std::vector<EncodedWindow> encode_windows(const std::vector<StockWindow>& ws, const Vocab& vocab,
                                          const StockModelSpec& spec);

ParamSet init_stock_params(const StockModelSpec& spec, std::uint64_t seed);

/// Logits [batch x classes].
ad::Tensor stock_forward(const StockModelSpec& spec, const ParamSet& params,
                         std::span<const EncodedWindow* const> windows, ForwardMode mode,
                         const RngStream& stream);

ad::Tensor stock_forward(const StockModelSpec& spec, const ParamSet& params,
                         const EncodedWindow& window, ForwardMode mode, const RngStream& stream);

/// Training windows per stock symbol.
using StockTable = std::map<std::string, std::vector<EncodedWindow>>;

TaskObjective stock_objective(const StockModelSpec& spec, std::shared_ptr<const StockTable> table);

double stock_accuracy(const StockModelSpec& spec, const ParamSet& params,
                      const std::vector<EncodedWindow>& windows, std::size_t batch = 128);

/// Each stock is a task with shared parameters; delegates to the meta
/// trainer and returns its result.
TrainResult maml_over_stocks(const StockModelSpec& spec, const ParamSet& init,
                             std::shared_ptr<const StockTable> stocks, const MetaConfig& cfg,
                             TrainMode mode = TrainMode::meta, const TrainHooks& hooks = {});

}  // namespace metaloop::stock

#endif  // METALOOP_STOCKPRED_MODEL_HPP
