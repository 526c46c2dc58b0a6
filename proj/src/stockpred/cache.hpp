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

#ifndef METALOOP_STOCKPRED_CACHE_HPP
#define METALOOP_STOCKPRED_CACHE_HPP

#include <optional>
#include <string>
#include <vector>

#include "stockpred/model.hpp"
#include "tasks/text.hpp"

namespace metaloop::stock {

struct PreparedStock {
  std::string symbol;
  std::vector<std::size_t> anchors;
  std::vector<std::vector<double>> prices;  // p_{t-T} .. p_t per window
  std::vector<EncodedWindow> windows;
  std::size_t dropped_flat = 0;
  std::size_t dropped_tweets = 0;
};

struct PreparedData {
  std::string config_hash;
  std::size_t lag = 0;
  Vocab vocab;
  std::vector<PreparedStock> stocks;
};

// Layout under dir:
//   manifest.json     {config_hash, lag, stocks: [{symbol, file, windows, ...}]}
//   vocab.txt
//   <symbol>.mlps     MLPS1 tensors: anchor, label, prices, price_feature,
//                     empty_day, tweet_slot, tweet_len, tokens
void save_prepared(const std::string& dir, const PreparedData& data);

/// nullopt when the cache is missing or was built under a different hash.
std::optional<PreparedData> load_prepared(const std::string& dir, const std::string& expected_hash);

}  // namespace metaloop::stock

#endif  // METALOOP_STOCKPRED_CACHE_HPP
