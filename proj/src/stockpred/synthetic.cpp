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

#include "stockpred/synthetic.hpp"

#include <cmath>

#include "autodiff/rng.hpp"
#include "common/error.hpp"

namespace metaloop::stock {

using namespace std::chrono;

std::vector<Date> weekday_calendar(Date start, std::size_t n) {
  std::vector<Date> out;
  for (Date d = start; out.size() < n; d += days{1}) {
    const weekday wd{d};
    if (wd != Saturday && wd != Sunday) out.push_back(d);
  }
  return out;
}

std::vector<SyntheticStock> gen_stock_family(std::size_t n_stocks, std::uint64_t seed,
                                             const SyntheticStockOptions& o) {
  if (n_stocks < 1) fail(ErrorKind::invalid_argument, "gen_stock_family: n_stocks must be >= 1");
  if (o.days < 2 || o.max_tweets < 1 || o.filler_words < 1 || o.shared_keywords < 2)
    fail(ErrorKind::invalid_argument, "gen_stock_family: bad options");
  const std::vector<Date> calendar = weekday_calendar(parse_date(o.start), o.days);
  const RngStream root(seed, "stock_family");
  std::vector<SyntheticStock> out;
  for (std::size_t s = 0; s < n_stocks; ++s) {
    Rng rng = root.child(s).engine();
    SyntheticStock st;
    st.prices.symbol = "S" + std::to_string(s);

    std::vector<std::string> keywords;
    for (std::size_t k = 0; k < o.shared_keywords; ++k) {
      const bool bull = k < o.shared_keywords / 2;
      const std::string word = (bull ? "bull" : "bear") + std::to_string(k);
      const double mag = o.effect * rng.uniform(1 - o.effect_spread, 1 + o.effect_spread);
      st.effects[word] = bull ? mag : -mag;
      keywords.push_back(word);
    }
    for (std::size_t k = 0; k < o.own_keywords; ++k) {
      const std::string word = "co" + std::to_string(s) + "x" + std::to_string(k);
      const double mag = o.effect * rng.uniform(1 - o.effect_spread, 1 + o.effect_spread);
      st.effects[word] = rng.bernoulli(0.5) ? mag : -mag;
      keywords.push_back(word);
    }

    auto filler = [&] {
      std::string text;
      const std::size_t len = 4 + rng.below(5);
      for (std::size_t i = 0; i < len; ++i) {
        if (i) text.push_back(' ');
        text += "f" + std::to_string(rng.below(o.filler_words));
      }
      return text;
    };

    double price = 100.0 * rng.uniform(0.5, 2.0);
    std::int64_t prev_close = duration_cast<seconds>(calendar[0].time_since_epoch()).count() - 8 * 3600;
    std::vector<double> next_return(o.days, 0.0);
    for (std::size_t t = 0; t < o.days; ++t) {
      const std::int64_t close =
          duration_cast<seconds>(calendar[t].time_since_epoch()).count() + kCloseHour * 3600;
      const std::size_t n_tweets = rng.below(o.max_tweets + 1);
      const bool news = n_tweets > 0 && rng.bernoulli(o.news_prob);
      const std::string& word = keywords[rng.below(keywords.size())];
      const std::size_t carriers = news ? 1 + rng.below(std::min<std::size_t>(2, n_tweets)) : 0;
      for (std::size_t j = 0; j < n_tweets; ++j) {
        TweetRecord tw;
        tw.symbol = st.prices.symbol;
        // Anywhere after the previous close, up to and including this one.
        tw.timestamp = prev_close + 1 + static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(close - prev_close)));
        tw.text = filler();
        if (j < carriers) tw.text += " " + word;
        st.tweets.push_back(std::move(tw));
      }
      next_return[t] = (news ? st.effects[word] : 0.0) + o.noise * rng.normal();
      prev_close = close;
    }
    for (std::size_t t = 0; t < o.days; ++t) {
      st.prices.points.push_back({calendar[t], price});
      price *= std::exp(next_return[t]);
    }
    out.push_back(std::move(st));
  }
  return out;
}

}  // namespace metaloop::stock
