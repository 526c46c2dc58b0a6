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

#ifndef METALOOP_STOCKPRED_DATA_HPP
#define METALOOP_STOCKPRED_DATA_HPP

#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace metaloop::stock {

using Date = std::chrono::sys_days;

Date parse_date(const std::string& iso);  // YYYY-MM-DD
std::string format_date(Date d);

/// Seconds since the epoch on the exchange clock. Accepts ISO-8601
/// ("2014-01-02T10:00:00", optional fractional seconds, "Z" or +hh:mm) and
/// Twitter's created_at ("Thu Jan 02 10:00:00 +0000 2014"). Explicit offsets
/// are normalised to UTC and then shifted by exchange_offset_minutes.
std::int64_t parse_timestamp(const std::string& text, int exchange_offset_minutes = 0);

struct PricePoint {
  Date date;
  double close = 0;
};

struct PriceSeries {
  std::string symbol;
  std::vector<PricePoint> points;

  /// Dates strictly increasing, prices positive and finite.
  void validate() const;
  std::vector<Date> calendar() const;
};

struct TweetRecord {
  std::string symbol;
  std::int64_t timestamp = 0;
  std::string text;
};

inline constexpr int kCloseHour = 16;

struct Alignment {
  // bags[i] holds the texts of tweets assigned to calendar[i].
  std::vector<std::vector<std::string>> bags;
  std::size_t dropped = 0;
};

/// Each tweet goes to the first trading day whose close is at or after its
/// timestamp. Tweets after the last close are dropped and counted. Input
/// order is kept within a day.
Alignment align_tweets_to_days(const std::vector<TweetRecord>& tweets,
                               const std::vector<Date>& calendar, int close_hour = kCloseHour);

enum class Movement { down, flat, up };

/// r = (p_next - p_t) / p_t; up if r > epsilon, down if r < -epsilon.
Movement label_movement(double p_t, double p_next, double epsilon);

enum class LabelMode { binary, ternary };

/// Class index: binary {down: 0, up: 1}; ternary {down: 0, flat: 1, up: 2}.
int class_index(Movement m, LabelMode mode);
std::size_t class_count(LabelMode mode);

struct StockWindow {
  std::string symbol;
  std::size_t anchor = 0;  // index t into the series
  // days[i] is the tweet bag of trading day t - T + 1 + i.
  std::vector<std::vector<std::string>> days;
  // closes p_{t-T} .. p_t
  std::vector<double> prices;
  Movement movement = Movement::flat;
  int label = 0;
};

struct WindowBuild {
  std::vector<StockWindow> windows;
  std::size_t dropped_flat = 0;
  std::optional<std::string> warning;
};

/// One window per anchor t in [T, n - 2]; binary mode drops flat moves.
WindowBuild build_windows(const PriceSeries& prices, const Alignment& days, std::size_t lag,
                          double epsilon, LabelMode mode);

/// Price CSV with header date,close (extra columns ignored).
PriceSeries load_prices(const std::string& path, const std::string& symbol);
/// Tweet JSONL, one {created_at, text} object per line. Unparseable or
/// empty rows are errors unless skip_bad.
std::vector<TweetRecord> load_tweets(const std::string& path, const std::string& symbol,
                                     int exchange_offset_minutes, bool skip_bad,
                                     std::size_t* skipped = nullptr);

}  // namespace metaloop::stock

#endif  // METALOOP_STOCKPRED_DATA_HPP
