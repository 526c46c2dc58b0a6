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

#ifndef METALOOP_MODELS_MODEL_HPP
#define METALOOP_MODELS_MODEL_HPP

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "autodiff/rng.hpp"
#include "autodiff/tensor.hpp"
#include "models/paramset.hpp"

namespace metaloop {

enum class ForwardMode { train, eval };

enum class EncoderKind { mlp, transformer };
enum class InputMode { feature_vector, token_sequence };

struct EncoderSpec {
  EncoderKind kind = EncoderKind::transformer;
  InputMode input = InputMode::token_sequence;
  std::size_t input_dim = 0;  // feature_vector only
  std::size_t hidden = 64;
  std::size_t layers = 2;
  // Transformer / token-sequence settings.
  std::size_t heads = 4;
  std::size_t max_seq_len = 64;
  std::size_t vocab_size = 0;
  std::size_t ffn_multiplier = 2;

  void validate() const;
  std::size_t output_dim() const { return hidden; }
};

enum class HeadKind { classification, regression };

struct HeadSpec {
  HeadKind kind = HeadKind::classification;
  std::size_t num_classes = 2;  // ignored for regression
  double dropout = 0.1;
  std::size_t input_dim = 0;  // 0 = encoder output dim

  std::size_t output_dim() const {
    return kind == HeadKind::regression ? 1 : num_classes;
  }
  void validate() const;
};

/// Shared encoder plus one head per task (hard parameter sharing).
struct ModelAssembly {
  EncoderSpec encoder;
  std::map<std::string, HeadSpec> heads;
  // Task id -> key in `heads` for tasks that share a head.
  std::map<std::string, std::string> head_alias;

  void validate() const;
  std::string head_key(std::string_view task) const;
  const HeadSpec& head(std::string_view task) const;
};

/// A batch in whichever form the encoder consumes.
struct ModelInput {
  std::vector<std::vector<double>> features;
  std::vector<std::vector<int>> tokens;

  std::size_t batch_size() const {
    return features.empty() ? tokens.size() : features.size();
  }
};

inline constexpr int kPadId = 0;

inline constexpr std::string_view kEncoderPrefix = "enc/";
std::string head_prefix(std::string_view task);
/// True for task-specific parameters ("head/..." or ".../head/...").
bool is_head_param(std::string_view name);

/// Uniform(-limit, limit) with limit = sqrt(6 / (fan_in + fan_out)).
std::vector<double> glorot_uniform(std::size_t fan_in, std::size_t fan_out,
                                   const RngStream& stream);

std::vector<NamedTensor> init_encoder(const EncoderSpec& spec,
                                      std::string_view prefix,
                                      const RngStream& stream);
std::vector<NamedTensor> init_head(const HeadSpec& spec, std::size_t input_dim,
                                   std::string_view prefix,
                                   const RngStream& stream);

/// Deterministic given the seed; weights Glorot-uniform, biases zero,
/// layer-norm gains one.
ParamSet init_params(const ModelAssembly& assembly, std::uint64_t seed);

/// Encoder output [batch x hidden]. Independent of any task.
ad::Tensor encode(const EncoderSpec& spec, const ParamSet& params,
                  std::string_view prefix, const ModelInput& input);

/// dropout -> linear on top of encoder features.
ad::Tensor apply_head(const HeadSpec& spec, const ParamSet& params,
                      std::string_view prefix, const ad::Tensor& features,
                      ForwardMode mode, const RngStream& stream);

/// Logits [batch x k] for classification heads, [batch x 1] for regression.
/// Reads `params` functionally; an adapted set can be substituted freely.
ad::Tensor forward(const ModelAssembly& assembly, const ParamSet& params,
                   std::string_view task, const ModelInput& input,
                   ForwardMode mode, const RngStream& stream);

/// Multi-head self-attention over one sequence [len x hidden]. When
/// `weights_out` is non-null it receives each head's [len x len] weights.
ad::Tensor self_attention(const ParamSet& params, std::string_view prefix,
                          const ad::Tensor& x, std::size_t heads,
                          std::vector<ad::Tensor>* weights_out = nullptr);

/// Fetches a parameter and checks its shape.
const ad::Tensor& param(const ParamSet& params, const std::string& name,
                        const ad::Shape& expected);

}  // namespace metaloop

#endif  // METALOOP_MODELS_MODEL_HPP
