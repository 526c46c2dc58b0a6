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

#include "tasks/text.hpp"

#include <algorithm>
#include <fstream>
#include <map>

#include "common/error.hpp"

namespace metaloop {

namespace {

bool is_space(unsigned char c) { return c == ' ' || (c >= '\t' && c <= '\r'); }
bool is_punct(unsigned char c) {
  return (c >= '!' && c <= '/') || (c >= ':' && c <= '@') || (c >= '[' && c <= '`') ||
         (c >= '{' && c <= '~');
}

}  // namespace

std::vector<std::string> split_words(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) out.push_back(std::move(cur));
    cur.clear();
  };
  for (unsigned char c : text) {
    if (is_space(c)) {
      flush();
    } else if (is_punct(c)) {
      flush();
      out.emplace_back(1, static_cast<char>(c));
    } else {
      cur.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : static_cast<char>(c));
    }
  }
  flush();
  return out;
}

Vocab::Vocab() {
  add("[PAD]");
  add("[UNK]");
  add("[SEP]");
}

void Vocab::add(std::string token) {
  if (ids_.count(token)) fail(ErrorKind::data, "duplicate vocabulary token '" + token + "'");
  ids_.emplace(token, static_cast<int>(tokens_.size()));
  tokens_.push_back(std::move(token));
}

Vocab Vocab::build(const std::vector<std::string>& texts, std::size_t max_size,
                   std::size_t min_count) {
  std::map<std::string, std::size_t> counts;
  for (const auto& t : texts)
    for (auto& w : split_words(t)) ++counts[std::move(w)];
  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  Vocab v;
  for (auto& [tok, n] : ranked) {
    if (n < min_count) break;
    if (max_size && v.size() >= max_size) break;
    if (v.ids_.count(tok)) continue;
    v.add(tok);
  }
  return v;
}

int Vocab::id(std::string_view token) const {
  const auto it = ids_.find(std::string(token));
  return it == ids_.end() ? kUnk : it->second;
}

const std::string& Vocab::token(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size())
    fail(ErrorKind::invalid_argument, "token id " + std::to_string(id) + " out of range");
  return tokens_[static_cast<std::size_t>(id)];
}

void Vocab::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::io, "cannot write " + path);
  for (const auto& t : tokens_) out << t << '\n';
  if (!out) fail(ErrorKind::io, "write failed for " + path);
}

Vocab Vocab::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::io, "cannot open " + path);
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  if (lines.size() < 3 || lines[0] != "[PAD]" || lines[1] != "[UNK]" || lines[2] != "[SEP]")
    fail(ErrorKind::data, path + ": not a vocabulary file (reserved tokens missing)");
  Vocab v;
  for (std::size_t i = 3; i < lines.size(); ++i) v.add(lines[i]);
  return v;
}

std::vector<int> encode_text(const Vocab& vocab, std::string_view text_a,
                             std::optional<std::string_view> text_b, std::size_t max_len) {
  auto ids = [&](std::string_view t) {
    std::vector<int> out;
    for (const auto& w : split_words(t)) out.push_back(vocab.id(w));
    return out;
  };
  std::vector<int> a = ids(text_a);
  if (!text_b) {
    if (a.size() > max_len) a.resize(max_len);
    return a;
  }
  std::vector<int> b = ids(*text_b);
  const std::size_t budget = max_len > 0 ? max_len - 1 : 0;
  while (a.size() + b.size() > budget) {
    if (a.size() > b.size()) a.pop_back();
    else b.pop_back();
  }
  a.push_back(Vocab::kSep);
  a.insert(a.end(), b.begin(), b.end());
  if (a.size() > max_len) a.resize(max_len);
  return a;
}

}  // namespace metaloop
