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

#ifndef METALOOP_RUNNER_CONFIG_HPP
#define METALOOP_RUNNER_CONFIG_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "meta/meta.hpp"
#include "models/model.hpp"
#include "stockpred/data.hpp"
#include "stockpred/synthetic.hpp"
#include "tasks/generators.hpp"

namespace metaloop::runner {

enum class RunMode { meta, joint, finetune, adapt_sweep, stock_meta, stock_baseline };

std::string mode_name(RunMode m);

enum class InputChoice { automatic, tokens, features };

struct GeneratorConfig {
  std::string family;  // "sinusoid" or "text"
  std::size_t tasks = 10;
  std::size_t examples = 100;
  std::size_t dev_examples = 100;
  std::size_t vocab_size = 200;  // text only
  std::uint64_t seed = 0;
  std::string prefix;  // prepended to generated task ids
  TextFamilyOptions text;
};

struct DataConfig {
  std::optional<std::string> manifest;  // resolved path
  std::optional<GeneratorConfig> generator;
  std::vector<std::string> tasks;  // subset; empty keeps all
  std::size_t vocab_size = 20000;
  std::size_t min_count = 1;
  std::size_t max_seq_len = 64;
};

struct ModelConfig {
  EncoderKind encoder = EncoderKind::transformer;
  InputChoice input = InputChoice::automatic;
  std::size_t hidden = 64;
  std::size_t layers = 2;
  std::size_t heads = 4;
  std::size_t ffn_multiplier = 2;
  double head_dropout = 0.1;
  bool shared_head = false;
};

struct SweepConfig {
  std::string task;
  std::optional<std::string> checkpoint;  // resolved path
  std::optional<std::string> vocab;       // resolved path
  bool random_init = false;
  std::vector<double> fractions = {0.001, 0.01, 0.1, 1.0};
  std::vector<std::uint64_t> seeds;  // empty: the run seed only
};

struct StockSourceConfig {
  std::optional<stock::SyntheticStockOptions> synthetic;
  std::size_t synthetic_stocks = 9;
  std::uint64_t synthetic_seed = 0;
  std::string prices_dir;  // resolved
  std::string tweets_dir;  // resolved
  std::vector<std::string> symbols;
};

struct StockConfig {
  StockSourceConfig source;
  std::vector<std::string> train_symbols;  // empty: all but held_out
  std::vector<std::string> held_out;
  std::size_t lag = 5;
  double epsilon = 0.005;
  stock::LabelMode labels = stock::LabelMode::binary;
  int exchange_offset_minutes = 0;
  std::optional<std::string> cache_dir;  // resolved; default <out>/stock_cache
  std::size_t vocab_size = 5000;
  std::size_t min_count = 1;
  // Model.
  EncoderKind encoder = EncoderKind::mlp;
  std::size_t hidden = 32;
  std::size_t layers = 1;
  std::size_t heads = 4;
  std::size_t day_dim = 32;
  std::size_t rnn_hidden = 64;
  double dropout = 0.1;
  bool raw_price = false;
  std::size_t max_tweets_per_day = 16;
  std::size_t max_tweet_len = 32;
  // Evaluation.
  TrainMode train_mode = TrainMode::meta;
  std::size_t adapt_steps = 10;
  std::size_t adapt_windows = 32;
  double dev_fraction = 0.2;
  std::size_t ar_order = 1;
};

struct RunConfig {
  RunMode mode = RunMode::meta;
  std::uint64_t seed = 0;
  std::string output_dir = "runs";
  bool skip_bad = false;
  bool log_wall_time = false;
  DataConfig data;
  ModelConfig model;
  MetaConfig meta;
  FineTuneConfig finetune;
  std::string finetune_task;
  std::optional<std::string> finetune_init;  // resolved checkpoint path
  SweepConfig sweep;
  StockConfig stock;
  // Raw bytes as read, kept for the frozen copy and the run id.
  std::string source_bytes;
  std::string source_path;
  std::string override_key;
};

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> output_dir;
  bool skip_bad = false;
};

/// Parses and validates; every rejection names the offending field.
RunConfig parse_config(const std::string& bytes, const std::string& base_dir,
                       const Overrides& overrides = {});
RunConfig load_config(const std::string& path, const Overrides& overrides = {});

/// Canonical text of the command-line overrides, folded into the run id.
std::string overrides_key(const Overrides& overrides);

}  // namespace metaloop::runner

#endif  // METALOOP_RUNNER_CONFIG_HPP
