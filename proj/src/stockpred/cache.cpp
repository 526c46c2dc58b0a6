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

#include "stockpred/cache.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "common/error.hpp"
#include "models/serialize.hpp"

namespace metaloop::stock {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

ad::Tensor vec(std::vector<double> v) {
  const std::size_t n = v.size();
  return ad::Tensor::constant({n}, std::move(v));
}

const ad::Tensor& find(const std::vector<NamedTensor>& entries, const std::string& name,
                       const std::string& file) {
  for (const auto& e : entries)
    if (e.name == name) return e.value;
  fail(ErrorKind::data, file + ": missing tensor '" + name + "'");
}

}  // namespace

void save_prepared(const std::string& dir, const PreparedData& data) {
  fs::create_directories(dir);
  json manifest;
  manifest["config_hash"] = data.config_hash;
  manifest["lag"] = data.lag;
  manifest["stocks"] = json::array();
  const std::size_t T = data.lag;
  for (const auto& s : data.stocks) {
    const std::size_t n = s.windows.size();
    std::vector<double> anchor, label, prices, feature, empty, slot, len, tokens;
    for (std::size_t w = 0; w < n; ++w) {
      const auto& win = s.windows[w];
      if (win.days.size() != T || s.prices[w].size() != T + 1)
        fail(ErrorKind::shape, s.symbol + ": window does not match the cache lag");
      anchor.push_back(static_cast<double>(s.anchors[w]));
      label.push_back(win.label);
      prices.insert(prices.end(), s.prices[w].begin(), s.prices[w].end());
      feature.insert(feature.end(), win.price_feature.begin(), win.price_feature.end());
      empty.insert(empty.end(), win.empty_day.begin(), win.empty_day.end());
      for (std::size_t d = 0; d < T; ++d) {
        for (const auto& ids : win.days[d]) {
          slot.push_back(static_cast<double>(w * T + d));
          len.push_back(static_cast<double>(ids.size()));
          tokens.insert(tokens.end(), ids.begin(), ids.end());
        }
      }
    }
    std::vector<NamedTensor> entries;
    entries.push_back({"anchor", vec(anchor)});
    entries.push_back({"label", vec(label)});
    entries.push_back({"prices", ad::Tensor::constant({n, T + 1}, prices)});
    entries.push_back({"price_feature", ad::Tensor::constant({n, T}, feature)});
    entries.push_back({"empty_day", ad::Tensor::constant({n, T}, empty)});
    entries.push_back({"tweet_slot", vec(slot)});
    entries.push_back({"tweet_len", vec(len)});
    entries.push_back({"tokens", vec(tokens)});
    const std::string file = s.symbol + ".mlps";
    save_tensors((fs::path(dir) / file).string(), entries);
    manifest["stocks"].push_back({{"symbol", s.symbol},
                                  {"file", file},
                                  {"windows", n},
                                  {"dropped_flat", s.dropped_flat},
                                  {"dropped_tweets", s.dropped_tweets}});
  }
  data.vocab.save((fs::path(dir) / "vocab.txt").string());
  // Manifest last: its presence marks a complete cache.
  std::ofstream out(fs::path(dir) / "manifest.json", std::ios::binary);
  out << manifest.dump(2) << '\n';
  if (!out) fail(ErrorKind::io, "cannot write cache manifest in " + dir);
}

std::optional<PreparedData> load_prepared(const std::string& dir, const std::string& expected_hash) {
  const fs::path mpath = fs::path(dir) / "manifest.json";
  if (!fs::exists(mpath)) return std::nullopt;
  json manifest;
  {
    std::ifstream in(mpath);
    std::stringstream ss;
    ss << in.rdbuf();
    try {
      manifest = json::parse(ss.str());
    } catch (const json::exception&) {
      return std::nullopt;
    }
  }
  if (!manifest.contains("config_hash") || manifest["config_hash"] != expected_hash) return std::nullopt;
  PreparedData data;
  data.config_hash = expected_hash;
  data.lag = manifest.at("lag").get<std::size_t>();
  data.vocab = Vocab::load((fs::path(dir) / "vocab.txt").string());
  const std::size_t T = data.lag;
  for (const auto& entry : manifest.at("stocks")) {
    PreparedStock s;
    s.symbol = entry.at("symbol").get<std::string>();
    s.dropped_flat = entry.value("dropped_flat", std::size_t{0});
    s.dropped_tweets = entry.value("dropped_tweets", std::size_t{0});
    const std::string file = (fs::path(dir) / entry.at("file").get<std::string>()).string();
    const auto tensors = load_tensors(file);
    const auto& anchor = find(tensors, "anchor", file);
    const auto& label = find(tensors, "label", file);
    const auto& prices = find(tensors, "prices", file);
    const auto& feature = find(tensors, "price_feature", file);
    const auto& empty = find(tensors, "empty_day", file);
    const auto& slot = find(tensors, "tweet_slot", file);
    const auto& len = find(tensors, "tweet_len", file);
    const auto& tokens = find(tensors, "tokens", file);
    const std::size_t n = anchor.size();
    if (label.size() != n || prices.size() != n * (T + 1) || feature.size() != n * T ||
        empty.size() != n * T || slot.size() != len.size())
      fail(ErrorKind::data, file + ": inconsistent tensor sizes");
    s.windows.resize(n);
    for (std::size_t w = 0; w < n; ++w) {
      s.anchors.push_back(static_cast<std::size_t>(anchor[w]));
      s.prices.emplace_back(prices.data().begin() + static_cast<std::ptrdiff_t>(w * (T + 1)),
                            prices.data().begin() + static_cast<std::ptrdiff_t>((w + 1) * (T + 1)));
      auto& win = s.windows[w];
      win.label = static_cast<int>(label[w]);
      win.days.resize(T);
      for (std::size_t d = 0; d < T; ++d) {
        win.price_feature.push_back(feature[w * T + d]);
        win.empty_day.push_back(empty[w * T + d]);
      }
    }
    std::size_t at = 0;
    for (std::size_t j = 0; j < slot.size(); ++j) {
      const auto sl = static_cast<std::size_t>(slot[j]);
      const auto l = static_cast<std::size_t>(len[j]);
      if (sl >= n * T || at + l > tokens.size()) fail(ErrorKind::data, file + ": corrupt tweet index");
      std::vector<int> ids;
      for (std::size_t k = 0; k < l; ++k) ids.push_back(static_cast<int>(tokens[at + k]));
      at += l;
      s.windows[sl / T].days[sl % T].push_back(std::move(ids));
    }
    data.stocks.push_back(std::move(s));
  }
  return data;
}

}  // namespace metaloop::stock
