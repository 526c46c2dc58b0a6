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

#ifndef METALOOP_TESTS_SUPPORT_STOCK_FIXTURE_HPP
#define METALOOP_TESTS_SUPPORT_STOCK_FIXTURE_HPP

#include <string>
#include <vector>

#include "stockpred/data.hpp"

namespace metaloop::testing {

// Ten trading days, Mon 2014-01-06 .. Fri 2014-01-17, and seven tweets.
//
//   t    date        close   move t->t+1 (eps 0.005)
//   0    01-06       100.0   +2.000%  up
//   1    01-07       102.0   -0.098%  flat
//   2    01-08       101.9   -0.883%  down
//   3    01-09       101.0   +1.980%  up
//   4    01-10       103.0    0.000%  flat
//   5    01-13       103.0   -2.913%  down
//   6    01-14       100.0   +0.400%  flat
//   7    01-15       100.4   +1.594%  up
//   8    01-16       102.0   -0.980%  down
//   9    01-17       101.0
//
// Tweets and their trading day (close at 16:00):
//   a  Mon 01-06 10:00            -> 0
//   b  Mon 01-06 16:00 (at close) -> 0
//   c  Mon 01-06 16:00:01         -> 1
//   d  Sat 01-11 12:00 (twitter)  -> 5 (Monday)
//   e  Thu 01-09 23:59            -> 4 (Friday)
//   f  Sun 01-05 09:00            -> 0
//   g  Fri 01-17 17:00            -> dropped
inline stock::PriceSeries fixture_prices() {
  stock::PriceSeries s;
  s.symbol = "FIX";
  const char* dates[] = {"2014-01-06", "2014-01-07", "2014-01-08", "2014-01-09", "2014-01-10",
                         "2014-01-13", "2014-01-14", "2014-01-15", "2014-01-16", "2014-01-17"};
  const double closes[] = {100.0, 102.0, 101.9, 101.0, 103.0, 103.0, 100.0, 100.4, 102.0, 101.0};
  for (int i = 0; i < 10; ++i) s.points.push_back({stock::parse_date(dates[i]), closes[i]});
  return s;
}

inline std::vector<stock::TweetRecord> fixture_tweets() {
  const std::pair<const char*, const char*> raw[] = {
      {"2014-01-06T10:00:00", "a"},
      {"2014-01-06 16:00:00", "b"},
      {"2014-01-06T16:00:01", "c"},
      {"Sat Jan 11 12:00:00 +0000 2014", "d"},
      {"2014-01-09T23:59:00Z", "e"},
      {"2014-01-05T09:00:00", "f"},
      {"2014-01-17T17:00:00", "g"},
  };
  std::vector<stock::TweetRecord> out;
  for (const auto& [ts, text] : raw) out.push_back({"FIX", stock::parse_timestamp(ts), text});
  return out;
}

struct ExpectedWindow {
  std::size_t anchor;
  std::vector<std::vector<std::string>> days;
  stock::Movement movement;
};

// Lag 3, ternary: anchors 3..8.
inline std::vector<ExpectedWindow> fixture_expected_windows() {
  using M = stock::Movement;
  return {
      {3, {{"c"}, {}, {}}, M::up},
      {4, {{}, {}, {"e"}}, M::flat},
      {5, {{}, {"e"}, {"d"}}, M::down},
      {6, {{"e"}, {"d"}, {}}, M::flat},
      {7, {{"d"}, {}, {}}, M::up},
      {8, {{}, {}, {}}, M::down},
  };
}

}  // namespace metaloop::testing

#endif  // METALOOP_TESTS_SUPPORT_STOCK_FIXTURE_HPP
