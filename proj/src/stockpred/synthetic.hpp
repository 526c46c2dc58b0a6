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

#ifndef METALOOP_STOCKPRED_SYNTHETIC_HPP
#define METALOOP_STOCKPRED_SYNTHETIC_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "stockpred/data.hpp"

namespace metaloop::stock {

/// Tweets carry the news: on a news day one keyword shows up in one or two
/// of the day's tweets and sets the next day's log return to that stock's
/// effect for the keyword, plus Gaussian noise. Shared keywords ("bull*",
/// "bear*") have a common sign across stocks and stock-specific
/// magnitudes; each stock also has its own keywords with random signs.
struct SyntheticStockOptions {
  std::size_t days = 400;
  std::size_t shared_keywords = 8;  // half bullish, half bearish
  std::size_t own_keywords = 2;
  std::size_t filler_words = 300;
  double news_prob = 0.7;
  std::size_t max_tweets = 4;
  double effect = 0.02;
  double effect_spread = 0.5;  // magnitudes ~ effect * U[1 - s, 1 + s]
  double noise = 0.003;
  std::string start = "2014-01-02";
};

struct SyntheticStock {
  PriceSeries prices;
  std::vector<TweetRecord> tweets;
  std::map<std::string, double> effects;
};

std::vector<SyntheticStock> gen_stock_family(std::size_t n_stocks, std::uint64_t seed,
                                             const SyntheticStockOptions& options = {});

/// Weekdays from `start`, n of them.
std::vector<Date> weekday_calendar(Date start, std::size_t n);

}  // namespace metaloop::stock

#endif  // METALOOP_STOCKPRED_SYNTHETIC_HPP
