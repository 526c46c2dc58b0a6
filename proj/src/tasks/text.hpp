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

#ifndef METALOOP_TASKS_TEXT_HPP
#define METALOOP_TASKS_TEXT_HPP

#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace metaloop {

/// Lowercased words; each ASCII punctuation character is its own token.
std::vector<std::string> split_words(std::string_view text);

class Vocab {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr int kSep = 2;

  Vocab();

  /// Tokens ordered by descending count, ties by byte order, so rebuilding
  /// from the same corpus gives the same ids. max_size counts the reserved
  /// ids; 0 means unbounded.
  static Vocab build(const std::vector<std::string>& texts, std::size_t max_size = 0,
                     std::size_t min_count = 1);

  int id(std::string_view token) const;
  const std::string& token(int id) const;
  std::size_t size() const { return tokens_.size(); }

  /// One token per line, in id order.
  void save(const std::string& path) const;
  static Vocab load(const std::string& path);

  friend bool operator==(const Vocab& a, const Vocab& b) { return a.tokens_ == b.tokens_; }

 private:
  void add(std::string token);

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> ids_;
};

/// ids(a) ++ [sep] ++ ids(b), or ids(a) alone. Over-long input is trimmed
/// from the end of the longer segment (the second on ties); the separator
/// is kept.
std::vector<int> encode_text(const Vocab& vocab, std::string_view text_a,
                             std::optional<std::string_view> text_b, std::size_t max_len);

}  // namespace metaloop

#endif  // METALOOP_TASKS_TEXT_HPP
