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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <sstream>

#include "autodiff/ops.hpp"
#include "common/error.hpp"
#include "models/model.hpp"
#include "models/serialize.hpp"

using namespace metaloop;
using ad::Tensor;

namespace {

ModelAssembly mlp_assembly() {
  ModelAssembly a;
  a.encoder.kind = EncoderKind::mlp;
  a.encoder.input = InputMode::feature_vector;
  a.encoder.input_dim = 3;
  a.encoder.hidden = 8;
  a.encoder.layers = 2;
  a.heads["cls"] = HeadSpec{HeadKind::classification, 3, 0.1, 0};
  a.heads["reg"] = HeadSpec{HeadKind::regression, 2, 0.0, 0};
  return a;
}

ModelAssembly transformer_assembly() {
  ModelAssembly a;
  a.encoder.kind = EncoderKind::transformer;
  a.encoder.input = InputMode::token_sequence;
  a.encoder.hidden = 16;
  a.encoder.layers = 2;
  a.encoder.heads = 4;
  a.encoder.max_seq_len = 12;
  a.encoder.vocab_size = 30;
  a.heads["t"] = HeadSpec{};
  return a;
}

ModelInput feature_batch() {
  ModelInput in;
  in.features = {{0.5, -1.0, 2.0}, {1.5, 0.0, -0.3}, {0.0, 0.2, 0.1}};
  return in;
}

ModelInput token_batch() {
  ModelInput in;
  in.tokens = {{5, 6, 7, 0, 0}, {3, 9, 12, 4, 8}, {}};
  return in;
}

}  // namespace

TEST_CASE("init is deterministic and biases are zero") {
  const auto a = transformer_assembly();
  const ParamSet p1 = init_params(a, 17);
  const ParamSet p2 = init_params(a, 17);
  CHECK(p1.bit_equal(p2));
  CHECK_FALSE(p1.bit_equal(init_params(a, 18)));
  CHECK(p1.same_layout(init_params(a, 18)));
  for (const auto& e : p1.entries()) {
    const bool is_bias = e.name.size() >= 2 && e.name.substr(e.name.size() - 2) == "/b";
    if (is_bias) {
      for (double v : e.value.data()) CHECK(v == 0.0);
    }
  }
}

TEST_CASE("glorot sample mean is within three sigma of zero") {
  const std::size_t fan_in = 100, fan_out = 200;
  const auto w = glorot_uniform(fan_in, fan_out, RngStream(3, "w"));
  REQUIRE(w.size() == fan_in * fan_out);
  const double limit = std::sqrt(6.0 / (fan_in + fan_out));
  double mean = 0;
  for (double v : w) {
    CHECK(std::abs(v) <= limit);
    mean += v;
  }
  mean /= static_cast<double>(w.size());
  const double sigma = limit / std::sqrt(3.0) / std::sqrt(static_cast<double>(w.size()));
  CHECK(std::abs(mean) < 3 * sigma);
}

TEST_CASE("forward shapes and eval determinism") {
  const auto a = mlp_assembly();
  const ParamSet p = init_params(a, 1);
  const RngStream s(1, "fwd");
  const Tensor logits = forward(a, p, "cls", feature_batch(), ForwardMode::eval, s);
  CHECK(logits.shape() == ad::Shape{3, 3});
  const Tensor again = forward(a, p, "cls", feature_batch(), ForwardMode::eval, RngStream(99));
  CHECK(logits.values() == again.values());
  CHECK(forward(a, p, "reg", feature_batch(), ForwardMode::eval, s).shape() == ad::Shape{3, 1});
  CHECK_THROWS_AS(forward(a, p, "missing", feature_batch(), ForwardMode::eval, s), Error);

  const auto t = transformer_assembly();
  const ParamSet pt = init_params(t, 2);
  const Tensor tl = forward(t, pt, "t", token_batch(), ForwardMode::eval, s);
  CHECK(tl.shape() == ad::Shape{3, 2});
  for (double v : tl.data()) CHECK(std::isfinite(v));
}

TEST_CASE("encoder output is independent of the task") {
  const auto a = mlp_assembly();
  const ParamSet p = init_params(a, 4);
  const Tensor h = encode(a.encoder, p, kEncoderPrefix, feature_batch());
  CHECK(h.shape() == ad::Shape{3, 8});
}

TEST_CASE("zero head weight gives logits equal to the bias") {
  const auto a = mlp_assembly();
  ParamSet p = init_params(a, 5);
  const std::string w = head_prefix("cls") + "w";
  const std::string b = head_prefix("cls") + "b";
  const Tensor bias = Tensor::constant({3}, {0.25, -1.0, 3.0});
  p = p.with_updates(ParamSet({{w, Tensor::zeros(p.at(w).shape())}, {b, bias}}));
  const Tensor logits = forward(a, p, "cls", feature_batch(), ForwardMode::eval, RngStream(1));
  for (std::size_t r = 0; r < 3; ++r)
    for (std::size_t c = 0; c < 3; ++c) CHECK(logits[r * 3 + c] == bias[c]);
}

TEST_CASE("train-mode dropout follows the stream") {
  const auto a = mlp_assembly();
  const ParamSet p = init_params(a, 6);
  const auto f = [&](std::uint64_t key) {
    return forward(a, p, "cls", feature_batch(), ForwardMode::train, RngStream(key, "d")).values();
  };
  CHECK(f(1) == f(1));
  CHECK(f(1) != f(2));
}

TEST_CASE("forward with adapted params leaves the original untouched") {
  const auto a = mlp_assembly();
  const ParamSet theta = init_params(a, 7).as_parameters();
  const ParamSet snapshot = theta.detached();
  const Tensor loss = ad::sum(forward(a, theta, "reg", feature_batch(), ForwardMode::eval, RngStream(0)));
  const ParamSet adapted = param_axpy(theta, grad(loss, theta, true), 0.1);
  forward(a, adapted, "reg", feature_batch(), ForwardMode::eval, RngStream(0));
  CHECK(theta.bit_equal(snapshot));
}

TEST_CASE("param shape mismatch is reported") {
  const auto a = mlp_assembly();
  ParamSet p = init_params(a, 8);
  const std::string w = head_prefix("cls") + "w";
  p = ParamSet(p.filtered([&](std::string_view n) { return n != w; }).entries())
          .merged(ParamSet({{w, Tensor::zeros({2, 2})}}));
  CHECK_THROWS_AS(forward(a, p, "cls", feature_batch(), ForwardMode::eval, RngStream(1)), Error);
}

TEST_CASE("attention rows sum to one") {
  const auto t = transformer_assembly();
  const ParamSet p = init_params(t, 9);
  Rng rng(1);
  std::vector<double> xs(7 * 16);
  for (double& v : xs) v = rng.uniform(-2, 2);
  std::vector<Tensor> weights;
  const Tensor out = self_attention(p, "enc/layer0/attn/", Tensor::constant({7, 16}, xs), 4, &weights);
  CHECK(out.shape() == ad::Shape{7, 16});
  REQUIRE(weights.size() == 4);
  for (const auto& w : weights) {
    for (std::size_t r = 0; r < 7; ++r) {
      double total = 0;
      for (std::size_t c = 0; c < 7; ++c) total += w[r * 7 + c];
      CHECK(std::abs(total - 1.0) < 1e-10);
    }
  }
}

TEST_CASE("pads do not affect the pooled representation") {
  const auto t = transformer_assembly();
  const ParamSet p = init_params(t, 10);
  ModelInput a, b;
  a.tokens = {{4, 5, 6}};
  b.tokens = {{4, 5, 6, 0, 0, 0}};
  CHECK(encode(t.encoder, p, kEncoderPrefix, a).values() ==
        encode(t.encoder, p, kEncoderPrefix, b).values());
}

TEST_CASE("spec validation") {
  auto t = transformer_assembly();
  t.encoder.heads = 5;
  CHECK_THROWS_AS(t.validate(), Error);
  HeadSpec h;
  h.num_classes = 1;
  CHECK_THROWS_AS(h.validate(), Error);
}

TEST_CASE("param_axpy") {
  const ParamSet p({{"x", Tensor::constant({}, {1.0})}});
  const ParamSet g({{"x", Tensor::constant({}, {2.0})}});
  CHECK(param_axpy(p, g, 0.1).at("x").item() == doctest::Approx(0.8));
  CHECK(param_axpy(p, g, 0.0).bit_equal(p));
  const ParamSet wrong({{"y", Tensor::constant({}, {2.0})}});
  CHECK_THROWS_AS(param_axpy(p, wrong, 0.1), Error);
}

TEST_CASE("MLPS1 round trip") {
  const ParamSet p = init_params(transformer_assembly(), 11);
  std::stringstream ss;
  write_tensors(ss, p.entries());
  CHECK(ss.str().rfind("MLPS1\n", 0) == 0);
  const ParamSet back(read_tensors(ss));
  CHECK(back.bit_equal(p));

  std::stringstream bad("MLPS2\nentries 0\ndata 0\n");
  CHECK_THROWS_AS(read_tensors(bad), Error);

  const auto path = std::filesystem::temp_directory_path() / "metaloop_models_rt.mlps";
  save_tensors(path.string(), p.entries());
  CHECK(ParamSet(load_tensors(path.string())).bit_equal(p));
  std::filesystem::remove(path);
}
