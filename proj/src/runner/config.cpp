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

#include "runner/config.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "common/error.hpp"

namespace metaloop::runner {

namespace fs = std::filesystem;
using nlohmann::json;

std::string mode_name(RunMode m) {
  switch (m) {
    case RunMode::meta: return "meta";
    case RunMode::joint: return "joint";
    case RunMode::finetune: return "finetune";
    case RunMode::adapt_sweep: return "adapt_sweep";
    case RunMode::stock_meta: return "stock_meta";
    case RunMode::stock_baseline: return "stock_baseline";
  }
  return "?";
}

namespace {

[[noreturn]] void bad(const std::string& field, const std::string& message) {
  fail(ErrorKind::config, "config field '" + field + "': " + message);
}

std::string describe(const json& v) {
  std::string s = v.dump();
  return s.size() > 40 ? s.substr(0, 37) + "..." : s;
}

// One JSON object; tracks which keys were read so leftovers can be rejected.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) bad(path_.empty() ? "<root>" : path_, "expected an object");
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  bool has(const std::string& key) {
    used_.insert(key);
    return j_.contains(key) && !j_.at(key).is_null();
  }

  std::optional<Section> sub(const std::string& key) {
    if (!has(key)) return std::nullopt;
    return Section(j_.at(key), field(key));
  }

  double real(const std::string& key, double def) {
    if (!has(key)) return def;
    const json& v = j_.at(key);
    if (!v.is_number()) bad(field(key), "expected a number, got " + describe(v));
    const double d = v.get<double>();
    if (!std::isfinite(d)) bad(field(key), "must be finite");
    return d;
  }
  double positive(const std::string& key, double def) {
    const double d = real(key, def);
    if (!(d > 0)) bad(field(key), "must be > 0, got " + std::to_string(d));
    return d;
  }
  double fraction(const std::string& key, double def, bool allow_one = false) {
    const double d = real(key, def);
    if (d < 0 || (allow_one ? d > 1 : d >= 1))
      bad(field(key), std::string("must lie in [0, 1") + (allow_one ? "]" : ")") + ", got " + std::to_string(d));
    return d;
  }

  std::int64_t integer(const std::string& key, std::int64_t def, std::int64_t min) {
    if (!has(key)) return def;
    const json& v = j_.at(key);
    if (!v.is_number_integer()) bad(field(key), "expected an integer, got " + describe(v));
    const auto i = v.get<std::int64_t>();
    if (i < min) bad(field(key), "must be >= " + std::to_string(min) + ", got " + std::to_string(i));
    return i;
  }
  std::size_t count(const std::string& key, std::size_t def, std::size_t min = 0) {
    return static_cast<std::size_t>(integer(key, static_cast<std::int64_t>(def), static_cast<std::int64_t>(min)));
  }
  std::uint64_t u64(const std::string& key, std::uint64_t def) {
    if (!has(key)) return def;
    const json& v = j_.at(key);
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0))
      bad(field(key), "expected a non-negative integer, got " + describe(v));
    return v.get<std::uint64_t>();
  }

  bool boolean(const std::string& key, bool def) {
    if (!has(key)) return def;
    const json& v = j_.at(key);
    if (!v.is_boolean()) bad(field(key), "expected true or false, got " + describe(v));
    return v.get<bool>();
  }

  std::string string(const std::string& key, const std::string& def) {
    if (!has(key)) return def;
    const json& v = j_.at(key);
    if (!v.is_string()) bad(field(key), "expected a string, got " + describe(v));
    return v.get<std::string>();
  }
  std::string required_string(const std::string& key) {
    if (!has(key)) bad(field(key), "required");
    const std::string s = string(key, "");
    if (s.empty()) bad(field(key), "must be non-empty");
    return s;
  }
  template <typename E>
  E choice(const std::string& key, E def, const std::vector<std::pair<std::string, E>>& options) {
    if (!has(key)) return def;
    const std::string s = string(key, "");
    std::string names;
    for (const auto& [name, value] : options) {
      if (name == s) return value;
      names += (names.empty() ? "" : ", ") + name;
    }
    bad(field(key), "unknown value '" + s + "' (expected one of " + names + ")");
  }

  std::vector<std::string> strings(const std::string& key) {
    std::vector<std::string> out;
    if (!has(key)) return out;
    const json& v = j_.at(key);
    if (!v.is_array()) bad(field(key), "expected a list of strings");
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_string() || v[i].get<std::string>().empty())
        bad(field(key) + "[" + std::to_string(i) + "]", "expected a non-empty string");
      out.push_back(v[i].get<std::string>());
    }
    return out;
  }
  std::vector<double> reals(const std::string& key, std::vector<double> def) {
    if (!has(key)) return def;
    const json& v = j_.at(key);
    if (!v.is_array() || v.empty()) bad(field(key), "expected a non-empty list of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) bad(field(key) + "[" + std::to_string(i) + "]", "expected a number");
      out.push_back(v[i].get<double>());
    }
    return out;
  }
  std::vector<std::uint64_t> u64s(const std::string& key) {
    std::vector<std::uint64_t> out;
    if (!has(key)) return out;
    const json& v = j_.at(key);
    if (!v.is_array() || v.empty()) bad(field(key), "expected a non-empty list of seeds");
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number_unsigned()) bad(field(key) + "[" + std::to_string(i) + "]", "expected a non-negative integer");
      out.push_back(v[i].get<std::uint64_t>());
    }
    return out;
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!used_.count(key)) bad(field(key), "unknown field");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

std::string resolve(const std::string& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() || base.empty() ? path.lexically_normal().string()
                                            : (fs::path(base) / path).lexically_normal().string();
}

std::string existing_file(Section& s, const std::string& key, const std::string& base) {
  const std::string path = resolve(base, s.required_string(key));
  if (!fs::is_regular_file(path)) bad(s.field(key), "file not found: " + path);
  return path;
}

std::string existing_dir(Section& s, const std::string& key, const std::string& base) {
  const std::string path = resolve(base, s.required_string(key));
  if (!fs::is_directory(path)) bad(s.field(key), "directory not found: " + path);
  return path;
}

EncoderKind encoder_kind(Section& s, const std::string& key, EncoderKind def) {
  return s.choice<EncoderKind>(key, def, {{"transformer", EncoderKind::transformer}, {"mlp", EncoderKind::mlp}});
}

void parse_data(Section s, DataConfig& d, const std::string& base) {
  const bool has_manifest = s.has("manifest");
  const bool has_generator = s.has("generator");
  if (has_manifest == has_generator) bad(s.field("manifest"), "give exactly one of 'manifest' or 'generator'");
  if (has_manifest) d.manifest = existing_file(s, "manifest", base);
  if (auto g = s.sub("generator")) {
    GeneratorConfig gen;
    gen.family = g->choice<std::string>("family", "", {{"sinusoid", "sinusoid"}, {"text", "text"}});
    if (gen.family.empty()) bad(g->field("family"), "required");
    gen.tasks = g->count("tasks", gen.tasks, 1);
    gen.examples = g->count("examples", gen.examples, 2);
    gen.dev_examples = g->count("dev_examples", gen.dev_examples, 1);
    gen.vocab_size = g->count("vocab_size", gen.vocab_size, 1);
    gen.seed = g->u64("seed", 0);
    gen.prefix = g->string("prefix", "");
    auto& t = gen.text;
    t.groups = g->count("groups", t.groups, 2);
    t.words_per_group = g->count("words_per_group", t.words_per_group, 1);
    t.positive_groups = g->count("positive_groups", t.positive_groups, 1);
    if (t.positive_groups >= t.groups) bad(g->field("positive_groups"), "must be less than groups");
    t.min_len = g->count("min_len", t.min_len, 1);
    t.max_len = g->count("max_len", t.max_len, 1);
    if (t.max_len < t.min_len) bad(g->field("max_len"), "must be >= min_len");
    t.max_keywords = g->count("max_keywords", t.max_keywords, 1);
    t.distractor_prob = g->fraction("distractor_prob", t.distractor_prob, true);
    t.dev_examples = gen.dev_examples;
    if (gen.family == "text" && gen.vocab_size < t.groups * t.words_per_group + 2)
      bad(g->field("vocab_size"), "too small for groups * words_per_group keywords");
    g->finish();
    d.generator = gen;
  }
  d.tasks = s.strings("tasks");
  d.vocab_size = s.count("vocab_size", d.vocab_size, 4);
  d.min_count = s.count("min_count", d.min_count, 1);
  d.max_seq_len = s.count("max_seq_len", d.max_seq_len, 1);
  s.finish();
}

void parse_model(Section s, ModelConfig& m) {
  m.encoder = encoder_kind(s, "encoder", m.encoder);
  m.input = s.choice<InputChoice>("input", m.input,
                                  {{"auto", InputChoice::automatic}, {"tokens", InputChoice::tokens},
                                   {"features", InputChoice::features}});
  m.hidden = s.count("hidden", m.hidden, 1);
  m.layers = s.count("layers", m.layers, 0);
  m.heads = s.count("heads", m.heads, 1);
  m.ffn_multiplier = s.count("ffn_multiplier", m.ffn_multiplier, 1);
  if (m.encoder == EncoderKind::transformer && m.hidden % m.heads != 0)
    bad(s.field("heads"), "must divide hidden (" + std::to_string(m.hidden) + ")");
  m.head_dropout = s.fraction("head_dropout", m.head_dropout);
  m.shared_head = s.boolean("shared_head", m.shared_head);
  s.finish();
}

void parse_meta(Section s, MetaConfig& m) {
  m.inner_lr = s.positive("inner_lr", m.inner_lr);
  m.outer_lr = s.positive("outer_lr", m.outer_lr);
  m.inner_steps = static_cast<int>(s.integer("inner_steps", m.inner_steps, 0));
  m.meta_batch = s.count("meta_batch", m.meta_batch, 1);
  m.support_size = s.count("support_size", m.support_size, 1);
  m.query_size = s.count("query_size", m.query_size, 1);
  m.epochs = static_cast<int>(s.integer("epochs", m.epochs, 0));
  m.steps_per_epoch = s.integer("steps_per_epoch", m.steps_per_epoch, 0);
  m.warmup_fraction = s.fraction("warmup_fraction", m.warmup_fraction);
  m.first_order = s.boolean("first_order", m.first_order);
  m.clip = s.real("clip", m.clip);
  if (m.clip < 0) bad(s.field("clip"), "must be >= 0 (0 disables clipping)");
  m.inner_scope = s.choice<InnerScope>("inner_scope", m.inner_scope,
                                       {{"all", InnerScope::all},
                                        {"encoder_only", InnerScope::encoder_only},
                                        {"head_only", InnerScope::head_only}});
  s.finish();
}

void parse_finetune_fields(Section& s, FineTuneConfig& f) {
  f.lr = s.positive("lr", f.lr);
  f.epochs = static_cast<int>(s.integer("epochs", f.epochs, 0));
  f.batch_size = s.count("batch_size", f.batch_size, 1);
  f.max_steps = s.integer("max_steps", f.max_steps, 0);
  f.warmup_fraction = s.fraction("warmup_fraction", f.warmup_fraction);
  f.clip = s.real("clip", f.clip);
  if (f.clip < 0) bad(s.field("clip"), "must be >= 0 (0 disables clipping)");
  f.sgd = s.choice<bool>("optimizer", f.sgd, {{"adamax", false}, {"sgd", true}});
}

void parse_stock(Section s, StockConfig& c, const std::string& base) {
  auto source = s.sub("source");
  if (!source) bad(s.field("source"), "required");
  Section& src = *source;
  if (auto syn = src.sub("synthetic")) {
    stock::SyntheticStockOptions o;
    c.source.synthetic_stocks = syn->count("stocks", c.source.synthetic_stocks, 2);
    c.source.synthetic_seed = syn->u64("seed", 0);
    o.days = syn->count("days", o.days, 3);
    o.shared_keywords = syn->count("shared_keywords", o.shared_keywords, 2);
    o.own_keywords = syn->count("own_keywords", o.own_keywords, 0);
    o.filler_words = syn->count("filler_words", o.filler_words, 1);
    o.news_prob = syn->fraction("news_prob", o.news_prob, true);
    o.max_tweets = syn->count("max_tweets", o.max_tweets, 1);
    o.effect = syn->positive("effect", o.effect);
    o.effect_spread = syn->fraction("effect_spread", o.effect_spread);
    o.noise = syn->real("noise", o.noise);
    if (o.noise < 0) bad(syn->field("noise"), "must be >= 0");
    o.start = syn->string("start", o.start);
    try {
      stock::parse_date(o.start);
    } catch (const Error& e) {
      bad(syn->field("start"), e.what());
    }
    syn->finish();
    c.source.synthetic = o;
    if (src.has("prices_dir") || src.has("tweets_dir"))
      bad(src.field("synthetic"), "cannot be combined with prices_dir/tweets_dir");
  } else {
    c.source.prices_dir = existing_dir(src, "prices_dir", base);
    c.source.tweets_dir = existing_dir(src, "tweets_dir", base);
  }
  c.source.symbols = src.strings("symbols");
  src.finish();
  c.train_symbols = s.strings("train_symbols");
  c.held_out = s.strings("held_out");
  c.lag = s.count("lag", c.lag, 1);
  c.epsilon = s.real("epsilon", c.epsilon);
  if (c.epsilon < 0) bad(s.field("epsilon"), "must be >= 0");
  c.labels = s.choice<stock::LabelMode>("labels", c.labels,
                                        {{"binary", stock::LabelMode::binary}, {"ternary", stock::LabelMode::ternary}});
  c.exchange_offset_minutes = static_cast<int>(s.integer("exchange_offset_minutes", 0, -24 * 60));
  if (c.exchange_offset_minutes > 24 * 60) bad(s.field("exchange_offset_minutes"), "must be within a day");
  if (s.has("cache_dir")) c.cache_dir = resolve(base, s.required_string("cache_dir"));
  c.vocab_size = s.count("vocab_size", c.vocab_size, 4);
  c.min_count = s.count("min_count", c.min_count, 1);
  if (auto m = s.sub("model")) {
    c.encoder = encoder_kind(*m, "encoder", c.encoder);
    c.hidden = m->count("hidden", c.hidden, 1);
    c.layers = m->count("layers", c.layers, 0);
    c.heads = m->count("heads", c.heads, 1);
    if (c.encoder == EncoderKind::transformer && c.hidden % c.heads != 0)
      bad(m->field("heads"), "must divide hidden");
    c.day_dim = m->count("day_dim", c.day_dim, 1);
    c.rnn_hidden = m->count("rnn_hidden", c.rnn_hidden, 1);
    c.dropout = m->fraction("dropout", c.dropout);
    c.raw_price = m->boolean("raw_price", c.raw_price);
    c.max_tweets_per_day = m->count("max_tweets_per_day", c.max_tweets_per_day, 1);
    c.max_tweet_len = m->count("max_tweet_len", c.max_tweet_len, 1);
    m->finish();
  }
  c.train_mode = s.choice<TrainMode>("train_mode", c.train_mode, {{"meta", TrainMode::meta}, {"joint", TrainMode::joint}});
  c.adapt_steps = s.count("adapt_steps", c.adapt_steps, 0);
  c.adapt_windows = s.count("adapt_windows", c.adapt_windows, 1);
  c.dev_fraction = s.fraction("dev_fraction", c.dev_fraction);
  c.ar_order = s.count("ar_order", c.ar_order, 1);
  s.finish();
}

}  // namespace

RunConfig parse_config(const std::string& bytes, const std::string& base_dir, const Overrides& overrides) {
  json root;
  try {
    root = json::parse(bytes);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::config, std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig cfg;
  cfg.source_bytes = bytes;
  cfg.override_key = overrides_key(overrides);
  Section s(root, "");
  cfg.mode = s.choice<RunMode>("mode", RunMode::meta,
                               {{"meta", RunMode::meta},
                                {"joint", RunMode::joint},
                                {"finetune", RunMode::finetune},
                                {"adapt_sweep", RunMode::adapt_sweep},
                                {"stock_meta", RunMode::stock_meta},
                                {"stock_baseline", RunMode::stock_baseline}});
  if (!s.has("mode")) bad("mode", "required");
  if (!s.has("seed") && !overrides.seed) bad("seed", "required");
  cfg.seed = overrides.seed ? *overrides.seed : s.u64("seed", 0);
  cfg.output_dir = resolve(base_dir, s.string("output_dir", "runs"));
  if (overrides.output_dir) cfg.output_dir = *overrides.output_dir;
  cfg.skip_bad = s.boolean("skip_bad", false) || overrides.skip_bad;
  if (auto log = s.sub("log")) {
    cfg.log_wall_time = log->boolean("wall_time", false);
    log->finish();
  }

  const bool stock_mode = cfg.mode == RunMode::stock_meta || cfg.mode == RunMode::stock_baseline;
  if (auto d = s.sub("data")) parse_data(*d, cfg.data, base_dir);
  else if (!stock_mode) bad("data", "required for mode " + mode_name(cfg.mode));
  if (auto m = s.sub("model")) parse_model(*m, cfg.model);
  if (auto m = s.sub("meta")) parse_meta(*m, cfg.meta);
  cfg.meta.seed = cfg.seed;
  cfg.finetune.seed = cfg.seed;

  if (auto f = s.sub("finetune")) {
    parse_finetune_fields(*f, cfg.finetune);
    cfg.finetune_task = f->string("task", "");
    if (f->has("init")) cfg.finetune_init = existing_file(*f, "init", base_dir);
    f->finish();
  }
  if (cfg.mode == RunMode::finetune && cfg.finetune_task.empty()) bad("finetune.task", "required for mode finetune");

  if (auto w = s.sub("sweep")) {
    cfg.sweep.task = w->string("task", "");
    cfg.sweep.random_init = w->choice<bool>("init", false, {{"checkpoint", false}, {"random", true}});
    if (w->has("checkpoint")) {
      const std::string path = resolve(base_dir, w->required_string("checkpoint"));
      if (!fs::is_regular_file(path)) bad(w->field("checkpoint"), "checkpoint not found: " + path);
      cfg.sweep.checkpoint = path;
    }
    if (w->has("vocab")) cfg.sweep.vocab = existing_file(*w, "vocab", base_dir);
    cfg.sweep.fractions = w->reals("fractions", cfg.sweep.fractions);
    for (std::size_t i = 0; i < cfg.sweep.fractions.size(); ++i) {
      const double f = cfg.sweep.fractions[i];
      if (!(f > 0 && f <= 1)) bad(w->field("fractions") + "[" + std::to_string(i) + "]", "must lie in (0, 1]");
    }
    cfg.sweep.seeds = w->u64s("seeds");
    w->finish();
  }
  if (cfg.mode == RunMode::adapt_sweep) {
    if (cfg.sweep.task.empty()) bad("sweep.task", "required for mode adapt_sweep");
    if (!cfg.sweep.random_init && !cfg.sweep.checkpoint)
      bad("sweep.checkpoint", "required unless sweep.init is \"random\"");
  }
  if (cfg.sweep.seeds.empty()) cfg.sweep.seeds = {cfg.seed};

  if (auto st = s.sub("stock")) parse_stock(*st, cfg.stock, base_dir);
  else if (stock_mode) bad("stock", "required for mode " + mode_name(cfg.mode));
  if (stock_mode && cfg.stock.held_out.empty()) bad("stock.held_out", "name at least one held-out symbol");
  s.finish();

  try {
    cfg.meta.validate();
  } catch (const Error& e) {
    bad("meta", e.what());
  }
  try {
    cfg.finetune.validate();
  } catch (const Error& e) {
    bad("finetune", e.what());
  }
  return cfg;
}

RunConfig load_config(const std::string& path, const Overrides& overrides) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::io, "cannot open config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  RunConfig cfg = parse_config(ss.str(), fs::path(path).parent_path().string(), overrides);
  cfg.source_path = path;
  return cfg;
}

std::string overrides_key(const Overrides& o) {
  std::string key;
  if (o.seed) key += "seed=" + std::to_string(*o.seed) + ";";
  if (o.skip_bad) key += "skip_bad;";
  return key;
}

}  // namespace metaloop::runner
