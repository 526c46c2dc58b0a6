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

#include "stockpred/data.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "common/error.hpp"

namespace metaloop::stock {

using namespace std::chrono;

namespace {

bool digits(const std::string& s, std::size_t pos, std::size_t n, int& out) {
  if (pos + n > s.size()) return false;
  int v = 0;
  for (std::size_t i = pos; i < pos + n; ++i) {
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
    v = v * 10 + (s[i] - '0');
  }
  out = v;
  return true;
}

std::optional<Date> make_date(int y, int m, int d) {
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(m)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) return std::nullopt;
  return sys_days{ymd};
}

std::int64_t epoch_seconds(Date d) {
  return duration_cast<seconds>(d.time_since_epoch()).count();
}

// Parses "+hh:mm", "+hhmm", "Z" at pos to the end; minutes east of UTC.
std::optional<int> parse_offset(const std::string& s, std::size_t pos) {
  if (pos == s.size()) return std::nullopt;
  if (s[pos] == 'Z' && pos + 1 == s.size()) return 0;
  if (s[pos] != '+' && s[pos] != '-') return std::nullopt;
  const int sign = s[pos] == '-' ? -1 : 1;
  int h = 0, m = 0;
  if (!digits(s, pos + 1, 2, h)) return std::nullopt;
  std::size_t p = pos + 3;
  if (p < s.size() && s[p] == ':') ++p;
  if (!digits(s, p, 2, m) || p + 2 != s.size()) return std::nullopt;
  return sign * (h * 60 + m);
}

[[noreturn]] void bad_timestamp(const std::string& text) {
  fail(ErrorKind::data, "unparseable timestamp '" + text + "'");
}

std::int64_t parse_iso(const std::string& s, int exchange_offset) {
  int y, mo, d;
  if (!digits(s, 0, 4, y) || s.size() < 10 || s[4] != '-' || !digits(s, 5, 2, mo) || s[7] != '-' ||
      !digits(s, 8, 2, d))
    bad_timestamp(s);
  const auto date = make_date(y, mo, d);
  if (!date) bad_timestamp(s);
  std::int64_t t = epoch_seconds(*date);
  if (s.size() == 10) return t;
  if (s[10] != 'T' && s[10] != ' ') bad_timestamp(s);
  int h, mi, sec = 0;
  if (!digits(s, 11, 2, h) || s.size() < 16 || s[13] != ':' || !digits(s, 14, 2, mi)) bad_timestamp(s);
  std::size_t p = 16;
  if (p < s.size() && s[p] == ':') {
    if (!digits(s, p + 1, 2, sec)) bad_timestamp(s);
    p += 3;
    if (p < s.size() && s[p] == '.') {
      ++p;
      while (p < s.size() && std::isdigit(static_cast<unsigned char>(s[p]))) ++p;
    }
  }
  if (h > 23 || mi > 59 || sec > 60) bad_timestamp(s);
  t += h * 3600 + mi * 60 + sec;
  if (p == s.size()) return t;
  const auto off = parse_offset(s, p);
  if (!off) bad_timestamp(s);
  return t - *off * 60 + exchange_offset * 60;
}

std::int64_t parse_twitter(const std::string& s, int exchange_offset) {
  // "Thu Jan 02 10:00:00 +0000 2014"
  static const char* months[] = {"Jan", "Feb", "Mar", "Apr", "May", "Jun",
                                 "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"};
  std::istringstream in(s);
  std::string dow, mon, dd, clock, off, yyyy;
  if (!(in >> dow >> mon >> dd >> clock >> off >> yyyy)) bad_timestamp(s);
  std::string rest;
  if (in >> rest) bad_timestamp(s);
  int m = 0;
  for (int i = 0; i < 12; ++i)
    if (mon == months[i]) m = i + 1;
  int d, y, h, mi, sec;
  if (!m || dd.size() != 2 || !digits(dd, 0, 2, d) || yyyy.size() != 4 || !digits(yyyy, 0, 4, y) ||
      clock.size() != 8 || !digits(clock, 0, 2, h) || clock[2] != ':' || !digits(clock, 3, 2, mi) ||
      clock[5] != ':' || !digits(clock, 6, 2, sec))
    bad_timestamp(s);
  const auto date = make_date(y, m, d);
  const auto offset = parse_offset(off, 0);
  if (!date || !offset || h > 23 || mi > 59 || sec > 60) bad_timestamp(s);
  return epoch_seconds(*date) + h * 3600 + mi * 60 + sec - *offset * 60 + exchange_offset * 60;
}

}  // namespace

Date parse_date(const std::string& iso) {
  int y, m, d;
  if (iso.size() != 10 || !digits(iso, 0, 4, y) || iso[4] != '-' || !digits(iso, 5, 2, m) ||
      iso[7] != '-' || !digits(iso, 8, 2, d))
    fail(ErrorKind::data, "unparseable date '" + iso + "' (expected YYYY-MM-DD)");
  const auto date = make_date(y, m, d);
  if (!date) fail(ErrorKind::data, "invalid date '" + iso + "'");
  return *date;
}

std::string format_date(Date d) {
  const year_month_day ymd{d};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

std::int64_t parse_timestamp(const std::string& text, int exchange_offset_minutes) {
  if (text.empty()) bad_timestamp(text);
  if (std::isdigit(static_cast<unsigned char>(text[0]))) return parse_iso(text, exchange_offset_minutes);
  return parse_twitter(text, exchange_offset_minutes);
}

void PriceSeries::validate() const {
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!(points[i].close > 0) || !std::isfinite(points[i].close))
      fail(ErrorKind::data, symbol + ": non-positive close on " + format_date(points[i].date));
    if (i && points[i].date <= points[i - 1].date)
      fail(ErrorKind::data, symbol + ": dates not strictly increasing at " + format_date(points[i].date));
  }
}

std::vector<Date> PriceSeries::calendar() const {
  std::vector<Date> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(p.date);
  return out;
}

Alignment align_tweets_to_days(const std::vector<TweetRecord>& tweets,
                               const std::vector<Date>& calendar, int close_hour) {
  if (!std::is_sorted(calendar.begin(), calendar.end()))
    fail(ErrorKind::invalid_argument, "align_tweets_to_days: calendar not sorted");
  std::vector<std::int64_t> closes;
  closes.reserve(calendar.size());
  for (Date d : calendar) closes.push_back(epoch_seconds(d) + close_hour * 3600);
  Alignment out;
  out.bags.resize(calendar.size());
  for (const auto& t : tweets) {
    const auto it = std::lower_bound(closes.begin(), closes.end(), t.timestamp);
    if (it == closes.end()) {
      ++out.dropped;
      continue;
    }
    out.bags[static_cast<std::size_t>(it - closes.begin())].push_back(t.text);
  }
  return out;
}

Movement label_movement(double p_t, double p_next, double epsilon) {
  if (!(p_t > 0)) fail(ErrorKind::invalid_argument, "label_movement: p_t must be > 0");
  const double r = (p_next - p_t) / p_t;
  if (r > epsilon) return Movement::up;
  if (r < -epsilon) return Movement::down;
  return Movement::flat;
}

int class_index(Movement m, LabelMode mode) {
  if (mode == LabelMode::binary) {
    if (m == Movement::flat) fail(ErrorKind::invalid_argument, "flat movement has no binary class");
    return m == Movement::up ? 1 : 0;
  }
  return static_cast<int>(m);
}

std::size_t class_count(LabelMode mode) { return mode == LabelMode::binary ? 2 : 3; }

WindowBuild build_windows(const PriceSeries& prices, const Alignment& days, std::size_t lag,
                          double epsilon, LabelMode mode) {
  if (lag < 1) fail(ErrorKind::invalid_argument, "build_windows: lag must be >= 1");
  const std::size_t n = prices.points.size();
  if (days.bags.size() != n)
    fail(ErrorKind::invalid_argument, "build_windows: alignment does not match the price calendar");
  WindowBuild out;
  if (n < lag + 2) {
    out.warning = prices.symbol + ": " + std::to_string(n) + " trading days, need at least " +
                  std::to_string(lag + 2) + " for lag " + std::to_string(lag);
    return out;
  }
  for (std::size_t t = lag; t + 1 < n; ++t) {
    const Movement m = label_movement(prices.points[t].close, prices.points[t + 1].close, epsilon);
    if (mode == LabelMode::binary && m == Movement::flat) {
      ++out.dropped_flat;
      continue;
    }
    StockWindow w;
    w.symbol = prices.symbol;
    w.anchor = t;
    w.days.assign(days.bags.begin() + static_cast<std::ptrdiff_t>(t + 1 - lag),
                  days.bags.begin() + static_cast<std::ptrdiff_t>(t + 1));
    for (std::size_t i = t - lag; i <= t; ++i) w.prices.push_back(prices.points[i].close);
    w.movement = m;
    w.label = class_index(m, mode);
    out.windows.push_back(std::move(w));
  }
  return out;
}

PriceSeries load_prices(const std::string& path, const std::string& symbol) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io, "cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) fail(ErrorKind::data, path + ": empty file");
  auto split = [](const std::string& l) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(l);
    while (std::getline(ss, cell, ',')) {
      while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
      out.push_back(cell);
    }
    return out;
  };
  const auto header = split(line);
  const auto find = [&](const char* name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) fail(ErrorKind::data, path + ": missing column '" + std::string(name) + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t dc = find("date"), cc = find("close");
  PriceSeries s;
  s.symbol = symbol;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \r") == std::string::npos) continue;
    const auto cells = split(line);
    if (cells.size() <= std::max(dc, cc))
      fail(ErrorKind::data, path + ": line " + std::to_string(lineno) + ": too few fields");
    char* end = nullptr;
    const double close = std::strtod(cells[cc].c_str(), &end);
    if (end == cells[cc].c_str() || *end != '\0')
      fail(ErrorKind::data, path + ": line " + std::to_string(lineno) + ": bad close '" + cells[cc] + "'");
    s.points.push_back({parse_date(cells[dc]), close});
  }
  s.validate();
  return s;
}

std::vector<TweetRecord> load_tweets(const std::string& path, const std::string& symbol,
                                     int exchange_offset_minutes, bool skip_bad,
                                     std::size_t* skipped) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io, "cannot open " + path);
  std::vector<TweetRecord> out;
  std::string line;
  std::size_t lineno = 0, bad = 0;
  std::string first_error;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto row = nlohmann::json::parse(line);
      if (!row.is_object() || !row.contains("created_at") || !row.contains("text") ||
          !row["created_at"].is_string() || !row["text"].is_string())
        fail(ErrorKind::data, "expected string keys created_at and text");
      TweetRecord t;
      t.symbol = symbol;
      t.timestamp = parse_timestamp(row["created_at"].get<std::string>(), exchange_offset_minutes);
      t.text = row["text"].get<std::string>();
      if (t.text.empty()) fail(ErrorKind::data, "empty text");
      out.push_back(std::move(t));
    } catch (const std::exception& e) {
      if (!skip_bad)
        fail(ErrorKind::data, path + ": line " + std::to_string(lineno) + ": " + e.what() +
                                  " (rerun with --skip-bad to drop bad rows)");
      ++bad;
    }
  }
  if (skipped) *skipped += bad;
  return out;
}

}  // namespace metaloop::stock
