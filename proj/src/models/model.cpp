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

#include "models/model.hpp"

#include <cmath>

#include "autodiff/ops.hpp"
#include "common/error.hpp"

namespace metaloop {

using ad::Shape;
using ad::Tensor;

void EncoderSpec::validate() const {
  if (hidden == 0) fail(ErrorKind::config, "encoder.hidden must be > 0");
  if (input == InputMode::feature_vector) {
    if (kind == EncoderKind::transformer) {
      fail(ErrorKind::config, "encoder.kind: transformer needs token-sequence input");
    }
    if (input_dim == 0) fail(ErrorKind::config, "encoder.input_dim must be > 0");
    if (layers == 0) fail(ErrorKind::config, "encoder.layers must be >= 1 for feature input");
  } else {
    if (vocab_size < 3) fail(ErrorKind::config, "encoder.vocab_size must be >= 3");
  }
  if (kind == EncoderKind::transformer) {
    if (heads == 0 || hidden % heads != 0) {
      fail(ErrorKind::config, "encoder.heads must divide encoder.hidden");
    }
    if (max_seq_len == 0) fail(ErrorKind::config, "encoder.max_seq_len must be > 0");
    if (ffn_multiplier == 0) fail(ErrorKind::config, "encoder.ffn_multiplier must be > 0");
  }
}

void HeadSpec::validate() const {
  if (kind == HeadKind::classification && num_classes < 2) {
    fail(ErrorKind::config, "head.num_classes must be >= 2");
  }
  if (!(dropout >= 0.0) || dropout >= 1.0) {
    fail(ErrorKind::config, "head.dropout must lie in [0, 1)");
  }
}

void ModelAssembly::validate() const {
  encoder.validate();
  for (const auto& [task, head] : heads) {
    if (task.empty()) fail(ErrorKind::config, "task id must be non-empty");
    head.validate();
  }
  for (const auto& [task, key] : head_alias) {
    if (!heads.count(key)) fail(ErrorKind::config, "task '" + task + "' aliases unknown head '" + key + "'");
  }
}

std::string ModelAssembly::head_key(std::string_view task) const {
  const auto it = head_alias.find(std::string(task));
  return it == head_alias.end() ? std::string(task) : it->second;
}

const HeadSpec& ModelAssembly::head(std::string_view task) const {
  auto it = heads.find(head_key(task));
  if (it == heads.end()) {
    fail(ErrorKind::invalid_argument, "unknown task id '" + std::string(task) + "'");
  }
  return it->second;
}

std::string head_prefix(std::string_view task) {
  return "head/" + std::string(task) + "/";
}

bool is_head_param(std::string_view name) {
  return name.substr(0, 5) == "head/" || name.find("/head/") != std::string_view::npos;
}

std::vector<double> glorot_uniform(std::size_t fan_in, std::size_t fan_out,
                                   const RngStream& stream) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Rng rng = stream.engine();
  std::vector<double> w(fan_in * fan_out);
  for (double& x : w) x = rng.uniform(-limit, limit);
  return w;
}

namespace {

void push_dense(std::vector<NamedTensor>& out, const std::string& name,
                std::size_t in, std::size_t outdim, const RngStream& stream) {
  out.push_back({name + "w", Tensor::parameter({in, outdim},
                                               glorot_uniform(in, outdim, stream.child(name + "w")))});
  out.push_back({name + "b", Tensor::parameter({outdim}, std::vector<double>(outdim, 0.0))});
}

void push_layer_norm(std::vector<NamedTensor>& out, const std::string& name,
                     std::size_t n) {
  out.push_back({name + "gain", Tensor::parameter({n}, std::vector<double>(n, 1.0))});
  out.push_back({name + "bias", Tensor::parameter({n}, std::vector<double>(n, 0.0))});
}

Tensor dense(const ParamSet& params, const std::string& name, const Tensor& x,
             std::size_t in, std::size_t outdim) {
  const Tensor& w = param(params, name + "w", {in, outdim});
  const Tensor& b = param(params, name + "b", {outdim});
  return ad::add(ad::matmul(x, w), b);
}

std::vector<int> strip_pad(const std::vector<int>& ids, std::size_t max_len,
                           std::size_t vocab) {
  std::vector<int> out;
  out.reserve(std::min(ids.size(), max_len));
  for (int id : ids) {
    if (id == kPadId) continue;
    if (id < 0 || static_cast<std::size_t>(id) >= vocab) {
      fail(ErrorKind::invalid_argument, "token id " + std::to_string(id) +
                                            " outside vocabulary of " +
                                            std::to_string(vocab));
    }
    if (out.size() == max_len) break;
    out.push_back(id);
  }
  return out;
}

Tensor encode_mlp_features(const EncoderSpec& spec, const ParamSet& params,
                           const std::string& prefix, const ModelInput& input) {
  const std::size_t batch = input.features.size();
  std::vector<double> flat;
  flat.reserve(batch * spec.input_dim);
  for (const auto& row : input.features) {
    if (row.size() != spec.input_dim) {
      fail(ErrorKind::shape, "feature row of length " + std::to_string(row.size()) +
                                 ", encoder expects " + std::to_string(spec.input_dim));
    }
    flat.insert(flat.end(), row.begin(), row.end());
  }
  Tensor x = Tensor::constant({batch, spec.input_dim}, std::move(flat));
  std::size_t in = spec.input_dim;
  for (std::size_t l = 0; l < spec.layers; ++l) {
    x = ad::relu(dense(params, prefix + "dense" + std::to_string(l) + "/", x, in, spec.hidden));
    in = spec.hidden;
  }
  return x;
}

Tensor encode_mlp_tokens(const EncoderSpec& spec, const ParamSet& params,
                         const std::string& prefix, const ModelInput& input) {
  const std::size_t batch = input.tokens.size();
  std::vector<int> all_ids;
  std::vector<std::size_t> lengths;
  for (const auto& seq : input.tokens) {
    std::vector<int> ids = strip_pad(seq, spec.max_seq_len, spec.vocab_size);
    lengths.push_back(ids.size());
    all_ids.insert(all_ids.end(), ids.begin(), ids.end());
  }
  Tensor x;
  if (all_ids.empty()) {
    x = Tensor::zeros({batch, spec.hidden});
  } else {
    const Tensor& table = param(params, prefix + "tok_emb", {spec.vocab_size, spec.hidden});
    const Tensor rows = ad::embedding_lookup(table, all_ids);
    // Mean over each sequence's tokens as a constant pooling matrix.
    std::vector<double> pool(batch * all_ids.size(), 0.0);
    std::size_t offset = 0;
    for (std::size_t b = 0; b < batch; ++b) {
      for (std::size_t j = 0; j < lengths[b]; ++j) {
        pool[b * all_ids.size() + offset + j] = 1.0 / static_cast<double>(lengths[b]);
      }
      offset += lengths[b];
    }
    x = ad::matmul(Tensor::constant({batch, all_ids.size()}, std::move(pool)), rows);
  }
  for (std::size_t l = 0; l < spec.layers; ++l) {
    x = ad::relu(dense(params, prefix + "dense" + std::to_string(l) + "/", x,
                       spec.hidden, spec.hidden));
  }
  return x;
}

Tensor encode_transformer_sequence(const EncoderSpec& spec, const ParamSet& params,
                                   const std::string& prefix,
                                   const std::vector<int>& ids) {
  const std::size_t h = spec.hidden;
  if (ids.empty()) return Tensor::zeros({1, h});
  const Tensor& tok = param(params, prefix + "tok_emb", {spec.vocab_size, h});
  const Tensor& pos = param(params, prefix + "pos_emb", {spec.max_seq_len, h});
  std::vector<int> positions(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) positions[i] = static_cast<int>(i);
  Tensor x = ad::add(ad::embedding_lookup(tok, ids), ad::embedding_lookup(pos, positions));
  const std::size_t ffn = h * spec.ffn_multiplier;
  for (std::size_t l = 0; l < spec.layers; ++l) {
    const std::string lp = prefix + "layer" + std::to_string(l) + "/";
    const Tensor attended = self_attention(params, lp + "attn/", x, spec.heads);
    x = ad::layer_norm(ad::add(x, attended), param(params, lp + "ln1/gain", {h}),
                       param(params, lp + "ln1/bias", {h}));
    const Tensor inner = ad::relu(dense(params, lp + "ffn/in/", x, h, ffn));
    const Tensor projected = dense(params, lp + "ffn/out/", inner, ffn, h);
    x = ad::layer_norm(ad::add(x, projected), param(params, lp + "ln2/gain", {h}),
                       param(params, lp + "ln2/bias", {h}));
  }
  return ad::scale(ad::sum_axis(x, 0), 1.0 / static_cast<double>(ids.size()));
}

}  // namespace

const Tensor& param(const ParamSet& params, const std::string& name,
                    const Shape& expected) {
  if (!params.contains(name)) {
    fail(ErrorKind::shape, "parameter set has no entry '" + name + "'");
  }
  const Tensor& t = params.at(name);
  if (t.shape() != expected) {
    fail(ErrorKind::shape, "parameter '" + name + "' has shape " +
                               ad::shape_string(t.shape()) + ", model expects " +
                               ad::shape_string(expected));
  }
  return t;
}

std::vector<NamedTensor> init_encoder(const EncoderSpec& spec,
                                      std::string_view prefix_view,
                                      const RngStream& stream) {
  spec.validate();
  const std::string prefix(prefix_view);
  std::vector<NamedTensor> out;
  const std::size_t h = spec.hidden;
  if (spec.kind == EncoderKind::mlp) {
    std::size_t in = spec.input_dim;
    if (spec.input == InputMode::token_sequence) {
      const std::string name = prefix + "tok_emb";
      out.push_back({name, Tensor::parameter({spec.vocab_size, h},
                                             glorot_uniform(spec.vocab_size, h, stream.child(name)))});
      in = h;
    }
    for (std::size_t l = 0; l < spec.layers; ++l) {
      push_dense(out, prefix + "dense" + std::to_string(l) + "/", in, h, stream);
      in = h;
    }
    return out;
  }
  const std::string tok = prefix + "tok_emb";
  const std::string pos = prefix + "pos_emb";
  out.push_back({tok, Tensor::parameter({spec.vocab_size, h},
                                        glorot_uniform(spec.vocab_size, h, stream.child(tok)))});
  out.push_back({pos, Tensor::parameter({spec.max_seq_len, h},
                                        glorot_uniform(spec.max_seq_len, h, stream.child(pos)))});
  const std::size_t ffn = h * spec.ffn_multiplier;
  for (std::size_t l = 0; l < spec.layers; ++l) {
    const std::string lp = prefix + "layer" + std::to_string(l) + "/";
    for (const char* proj : {"q", "k", "v", "o"}) {
      push_dense(out, lp + "attn/" + proj + "/", h, h, stream);
    }
    push_layer_norm(out, lp + "ln1/", h);
    push_dense(out, lp + "ffn/in/", h, ffn, stream);
    push_dense(out, lp + "ffn/out/", ffn, h, stream);
    push_layer_norm(out, lp + "ln2/", h);
  }
  return out;
}

std::vector<NamedTensor> init_head(const HeadSpec& spec, std::size_t input_dim,
                                   std::string_view prefix,
                                   const RngStream& stream) {
  spec.validate();
  std::vector<NamedTensor> out;
  push_dense(out, std::string(prefix), spec.input_dim ? spec.input_dim : input_dim,
             spec.output_dim(), stream);
  return out;
}

ParamSet init_params(const ModelAssembly& assembly, std::uint64_t seed) {
  assembly.validate();
  const RngStream stream(seed, "init");
  std::vector<NamedTensor> entries = init_encoder(assembly.encoder, kEncoderPrefix, stream);
  for (const auto& [task, head] : assembly.heads) {
    auto h = init_head(head, assembly.encoder.output_dim(), head_prefix(task), stream);
    entries.insert(entries.end(), h.begin(), h.end());
  }
  return ParamSet(std::move(entries));
}

Tensor self_attention(const ParamSet& params, std::string_view prefix_view,
                      const Tensor& x, std::size_t heads,
                      std::vector<Tensor>* weights_out) {
  const std::string prefix(prefix_view);
  const std::size_t h = x.dim(1);
  const std::size_t dh = h / heads;
  const Tensor q = dense(params, prefix + "q/", x, h, h);
  const Tensor k = dense(params, prefix + "k/", x, h, h);
  const Tensor v = dense(params, prefix + "v/", x, h, h);
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(dh));
  std::vector<Tensor> outputs;
  outputs.reserve(heads);
  for (std::size_t i = 0; i < heads; ++i) {
    const Tensor qh = ad::slice(q, 1, i * dh, (i + 1) * dh);
    const Tensor kh = ad::slice(k, 1, i * dh, (i + 1) * dh);
    const Tensor vh = ad::slice(v, 1, i * dh, (i + 1) * dh);
    const Tensor weights =
        ad::softmax(ad::scale(ad::matmul(qh, ad::transpose(kh)), inv_sqrt), 1);
    if (weights_out) weights_out->push_back(weights);
    outputs.push_back(ad::matmul(weights, vh));
  }
  const Tensor merged = heads == 1 ? outputs[0] : ad::concat(outputs, 1);
  return dense(params, prefix + "o/", merged, h, h);
}

Tensor encode(const EncoderSpec& spec, const ParamSet& params,
              std::string_view prefix_view, const ModelInput& input) {
  const std::string prefix(prefix_view);
  if (input.batch_size() == 0) fail(ErrorKind::shape, "forward on an empty batch");
  if (spec.input == InputMode::feature_vector) {
    if (input.features.empty()) {
      fail(ErrorKind::invalid_argument, "encoder expects feature vectors");
    }
    return encode_mlp_features(spec, params, prefix, input);
  }
  if (input.tokens.empty()) fail(ErrorKind::invalid_argument, "encoder expects token sequences");
  if (spec.kind == EncoderKind::mlp) return encode_mlp_tokens(spec, params, prefix, input);
  std::vector<Tensor> rows;
  rows.reserve(input.tokens.size());
  for (const auto& seq : input.tokens) {
    rows.push_back(encode_transformer_sequence(
        spec, params, prefix, strip_pad(seq, spec.max_seq_len, spec.vocab_size)));
  }
  return rows.size() == 1 ? rows[0] : ad::concat(rows, 0);
}

Tensor apply_head(const HeadSpec& spec, const ParamSet& params,
                  std::string_view prefix, const Tensor& features,
                  ForwardMode mode, const RngStream& stream) {
  const std::size_t in = features.dim(1);
  if (spec.input_dim && spec.input_dim != in) {
    fail(ErrorKind::shape, "head expects input dim " + std::to_string(spec.input_dim) +
                               ", got " + std::to_string(in));
  }
  const Tensor dropped =
      ad::dropout(features, spec.dropout, stream.child("head_dropout"),
                  mode == ForwardMode::train);
  return dense(params, std::string(prefix), dropped, in, spec.output_dim());
}

Tensor forward(const ModelAssembly& assembly, const ParamSet& params,
               std::string_view task, const ModelInput& input,
               ForwardMode mode, const RngStream& stream) {
  const HeadSpec& head = assembly.head(task);
  const Tensor features = encode(assembly.encoder, params, kEncoderPrefix, input);
  return apply_head(head, params, head_prefix(assembly.head_key(task)), features, mode, stream);
}

}  // namespace metaloop
