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

#include "metaloop/metaloop.h"

#include <exception>
#include <new>
#include <string>
#include <vector>

#include "common/error.hpp"
#include "optim/optim.hpp"
#include "runner/config.hpp"
#include "runner/run.hpp"

struct ml_config {
  metaloop::runner::RunConfig cfg;
  std::string mode;
};

struct ml_run {
  metaloop::runner::RunRecord record;
};

struct ml_paramset {
  metaloop::Checkpoint ckpt;
  std::vector<std::string> names;
};

struct ml_strings {
  std::vector<std::string> items;
};

namespace {

thread_local std::string last_error;

ml_status status_of(metaloop::ErrorKind kind) {
  using metaloop::ErrorKind;
  switch (kind) {
    case ErrorKind::invalid_argument: return ML_ERR_INVALID_ARGUMENT;
    case ErrorKind::shape: return ML_ERR_SHAPE;
    case ErrorKind::config: return ML_ERR_CONFIG;
    case ErrorKind::io: return ML_ERR_IO;
    case ErrorKind::data: return ML_ERR_DATA;
    case ErrorKind::numeric: return ML_ERR_NUMERIC;
  }
  return ML_ERR_INTERNAL;
}

template <typename F>
ml_status guarded(F&& body) {
  last_error.clear();
  try {
    body();
    return ML_OK;
  } catch (const metaloop::Error& e) {
    last_error = e.what();
    return status_of(e.kind());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
  } catch (const std::exception& e) {
    last_error = e.what();
  } catch (...) {
    last_error = "unknown error";
  }
  return ML_ERR_INTERNAL;
}

ml_status null_arg(const char* what) {
  last_error = std::string(what) + " must not be NULL";
  return ML_ERR_INVALID_ARGUMENT;
}

metaloop::runner::Overrides overrides_of(const ml_options* o) {
  metaloop::runner::Overrides out;
  if (!o) return out;
  if (o->has_seed) out.seed = o->seed;
  if (o->output_dir) out.output_dir = o->output_dir;
  out.skip_bad = o->skip_bad != 0;
  return out;
}

template <typename Cmd>
ml_status run_verb(const ml_config* config, ml_run** out, Cmd cmd) {
  if (!config) return null_arg("config");
  if (!out) return null_arg("out");
  *out = nullptr;
  return guarded([&] { *out = new ml_run{cmd(config->cfg)}; });
}

}  // namespace

extern "C" {

const char* ml_version(void) { return "0.1.0"; }
const char* ml_last_error(void) { return last_error.c_str(); }

const char* ml_status_name(ml_status status) {
  switch (status) {
    case ML_OK: return "ok";
    case ML_ERR_INVALID_ARGUMENT: return "invalid argument";
    case ML_ERR_SHAPE: return "shape error";
    case ML_ERR_CONFIG: return "config error";
    case ML_ERR_IO: return "i/o error";
    case ML_ERR_DATA: return "data error";
    case ML_ERR_NUMERIC: return "numeric error";
    case ML_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

ml_status ml_config_load(const char* path, const ml_options* options, ml_config** out) {
  if (!path) return null_arg("path");
  if (!out) return null_arg("out");
  *out = nullptr;
  return guarded([&] {
    auto cfg = metaloop::runner::load_config(path, overrides_of(options));
    const std::string mode = metaloop::runner::mode_name(cfg.mode);
    *out = new ml_config{std::move(cfg), mode};
  });
}

ml_status ml_config_parse(const char* json_text, const char* base_dir, const ml_options* options, ml_config** out) {
  if (!json_text) return null_arg("json_text");
  if (!out) return null_arg("out");
  *out = nullptr;
  return guarded([&] {
    auto cfg = metaloop::runner::parse_config(json_text, base_dir ? base_dir : "", overrides_of(options));
    const std::string mode = metaloop::runner::mode_name(cfg.mode);
    *out = new ml_config{std::move(cfg), mode};
  });
}

const char* ml_config_mode(const ml_config* c) { return c ? c->mode.c_str() : ""; }
uint64_t ml_config_seed(const ml_config* c) { return c ? c->cfg.seed : 0; }
const char* ml_config_output_dir(const ml_config* c) { return c ? c->cfg.output_dir.c_str() : ""; }
void ml_config_free(ml_config* c) { delete c; }

ml_status ml_train(const ml_config* c, ml_run** out) {
  return run_verb(c, out, metaloop::runner::cmd_train);
}
ml_status ml_adapt_sweep(const ml_config* c, ml_run** out) {
  return run_verb(c, out, metaloop::runner::cmd_adapt_sweep);
}
ml_status ml_stock_train(const ml_config* c, ml_run** out) {
  return run_verb(c, out, metaloop::runner::cmd_stock_train);
}
ml_status ml_baseline(const ml_config* c, ml_run** out) {
  return run_verb(c, out, metaloop::runner::cmd_baseline);
}

ml_status ml_stock_prep(const ml_config* c, ml_strings** summary) {
  if (!c) return null_arg("config");
  if (!summary) return null_arg("summary");
  *summary = nullptr;
  return guarded([&] {
    const auto s = metaloop::runner::cmd_stock_prep(c->cfg);
    auto* out = new ml_strings;
    out->items.push_back("cache " + s.cache_dir + (s.reused ? " reused" : " built"));
    for (const auto& [sym, n] : s.windows) out->items.push_back(sym + " " + std::to_string(n));
    *summary = out;
  });
}

ml_status ml_report(const char* const* runs, size_t n_runs, const char* runs_root, const char* out_dir,
                    ml_strings** files) {
  if (!runs && n_runs) return null_arg("runs");
  if (!out_dir) return null_arg("out_dir");
  if (!files) return null_arg("files");
  *files = nullptr;
  return guarded([&] {
    std::vector<std::string> refs;
    for (size_t i = 0; i < n_runs; ++i) {
      if (!runs[i]) metaloop::fail(metaloop::ErrorKind::invalid_argument, "run reference is NULL");
      refs.emplace_back(runs[i]);
    }
    *files = new ml_strings{metaloop::runner::cmd_report(refs, runs_root ? runs_root : "runs", out_dir)};
  });
}

const char* ml_run_id(const ml_run* r) { return r ? r->record.id.c_str() : ""; }
const char* ml_run_dir(const ml_run* r) { return r ? r->record.dir.c_str() : ""; }
const char* ml_run_metrics_path(const ml_run* r) { return r ? r->record.metrics.c_str() : ""; }
const char* ml_run_status(const ml_run* r) { return r ? r->record.status.c_str() : ""; }
size_t ml_run_checkpoint_count(const ml_run* r) { return r ? r->record.checkpoints.size() : 0; }
const char* ml_run_checkpoint(const ml_run* r, size_t i) {
  return r && i < r->record.checkpoints.size() ? r->record.checkpoints[i].c_str() : nullptr;
}
void ml_run_free(ml_run* r) { delete r; }

size_t ml_strings_count(const ml_strings* s) { return s ? s->items.size() : 0; }
const char* ml_strings_at(const ml_strings* s, size_t i) {
  return s && i < s->items.size() ? s->items[i].c_str() : nullptr;
}
void ml_strings_free(ml_strings* s) { delete s; }

ml_status ml_paramset_load(const char* path, ml_paramset** out) {
  if (!path) return null_arg("path");
  if (!out) return null_arg("out");
  *out = nullptr;
  return guarded([&] {
    auto* p = new ml_paramset{metaloop::load_checkpoint(path), {}};
    p->names = p->ckpt.params.names();
    *out = p;
  });
}

size_t ml_paramset_size(const ml_paramset* p) { return p ? p->ckpt.params.size() : 0; }
const char* ml_paramset_name(const ml_paramset* p, size_t i) {
  return p && i < p->names.size() ? p->names[i].c_str() : nullptr;
}
size_t ml_paramset_numel(const ml_paramset* p, size_t i) {
  return p && i < p->ckpt.params.size() ? p->ckpt.params[i].value.size() : 0;
}

ml_status ml_paramset_values(const ml_paramset* p, size_t i, double* out, size_t capacity) {
  if (!p) return null_arg("params");
  if (!out && capacity) return null_arg("out");
  if (i >= p->ckpt.params.size()) {
    last_error = "parameter index " + std::to_string(i) + " out of range";
    return ML_ERR_INVALID_ARGUMENT;
  }
  return guarded([&] {
    const auto values = p->ckpt.params[i].value.values();
    for (size_t k = 0; k < values.size() && k < capacity; ++k) out[k] = values[k];
  });
}

int ml_paramset_has_optimizer(const ml_paramset* p) { return p && p->ckpt.optimizer.has_value(); }
int ml_paramset_equal(const ml_paramset* a, const ml_paramset* b) {
  return a && b && a->ckpt.params.bit_equal(b->ckpt.params);
}
void ml_paramset_free(ml_paramset* p) { delete p; }

}  // extern "C"
