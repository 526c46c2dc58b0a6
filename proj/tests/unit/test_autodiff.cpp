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

#include "autodiff/ops.hpp"
#include "common/error.hpp"
#include "support/gradcheck.hpp"
#include "support/op_catalog.hpp"

using metaloop::Error;
using metaloop::Rng;
using metaloop::RngStream;
using metaloop::ad::Tensor;
namespace ad = metaloop::ad;
namespace mt = metaloop::testing;

TEST_CASE("add and matmul basics") {
  const Tensor a = Tensor::constant({2}, {1, 2});
  const Tensor b = Tensor::constant({2}, {3, 4});
  CHECK(ad::add(a, b).values() == std::vector<double>{4, 6});

  Rng rng(3);
  const Tensor m = mt::random_tensor(rng, {3, 3});
  const Tensor eye = Tensor::constant({3, 3}, {1, 0, 0, 0, 1, 0, 0, 0, 1});
  CHECK(ad::matmul(eye, m).values() == m.values());
}

TEST_CASE("product rule") {
  const Tensor a = Tensor::parameter({}, {2.0});
  const Tensor b = Tensor::constant({}, {5.0});
  const auto g = ad::grad(ad::mul(a, b), std::vector<Tensor>{a});
  CHECK(g[0].item() == doctest::Approx(5.0));
}

TEST_CASE("first and second derivatives of powers") {
  const Tensor x = Tensor::parameter({}, {3.0});
  const std::vector<Tensor> wrt{x};
  CHECK(ad::grad(ad::square(x), wrt)[0].item() == doctest::Approx(6.0));

  const Tensor y = Tensor::parameter({}, {2.0});
  const std::vector<Tensor> wrt_y{y};
  const Tensor cube = ad::mul(ad::square(y), y);
  const Tensor dy = ad::grad(cube, wrt_y, /*create_graph=*/true)[0];
  CHECK(dy.item() == doctest::Approx(12.0));
  CHECK(dy.requires_grad());
  CHECK(ad::grad(dy, wrt_y)[0].item() == doctest::Approx(12.0));
}

TEST_CASE("create_graph appends nodes after the output") {
  const Tensor x = Tensor::parameter({2}, {0.5, -1.0});
  const Tensor y = ad::sum(ad::tanh(x));
  const std::vector<Tensor> wrt{x};
  const Tensor g = ad::grad(y, wrt, true)[0];
  REQUIRE(g.node_id().has_value());
  CHECK(*g.node_id() > *y.node_id());
  const Tensor flat = ad::grad(y, wrt, false)[0];
  CHECK_FALSE(flat.requires_grad());
  CHECK_FALSE(flat.node_id().has_value());
}

TEST_CASE("unreached parameters get zero gradients") {
  const Tensor x = Tensor::parameter({2}, {1, 2});
  const Tensor unused = Tensor::parameter({3}, {1, 2, 3});
  const auto g = ad::grad(ad::sum(x), std::vector<Tensor>{x, unused});
  CHECK(g[1].shape() == ad::Shape{3});
  CHECK(g[1].values() == std::vector<double>{0, 0, 0});
}

TEST_CASE("grad rejects non-scalar output") {
  const Tensor x = Tensor::parameter({2}, {1, 2});
  CHECK_THROWS_AS(ad::grad(x, std::vector<Tensor>{x}), Error);
}

TEST_CASE("shape mismatch reports both shapes") {
  const Tensor a = Tensor::constant({2, 3}, std::vector<double>(6, 1.0));
  const Tensor b = Tensor::constant({4}, std::vector<double>(4, 1.0));
  try {
    ad::add(a, b);
    FAIL("expected a shape error");
  } catch (const Error& e) {
    const std::string what = e.what();
    CHECK(what.find("[2x3]") != std::string::npos);
    CHECK(what.find("[4]") != std::string::npos);
  }
  CHECK_THROWS_AS(ad::matmul(a, a), Error);
}

TEST_CASE("softmax, log_softmax and losses") {
  const Tensor z = Tensor::constant({3}, {0, 0, 0});
  const Tensor uniform = ad::softmax(z, 0);
  for (double v : uniform.data()) CHECK(v == doctest::Approx(1.0 / 3.0));

  const Tensor logits = Tensor::constant({1, 2}, {0, 0});
  const std::vector<int> label0{0};
  CHECK(ad::cross_entropy(logits, label0).item() == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  const Tensor skewed = Tensor::constant({1, 2}, {2, 0});
  const double expected = -std::log(std::exp(2.0) / (std::exp(2.0) + 1.0));
  CHECK(ad::cross_entropy(skewed, label0).item() == doctest::Approx(expected).epsilon(1e-12));
  CHECK(expected == doctest::Approx(0.1269).epsilon(1e-3));

  Rng rng(5);
  const Tensor x = mt::random_tensor(rng, {4, 3});
  CHECK(ad::mse(x, x).item() == 0.0);

  CHECK_THROWS_AS(ad::cross_entropy(Tensor::zeros({0, 2}), std::vector<int>{}), Error);
  CHECK_THROWS_AS(ad::cross_entropy(logits, std::vector<int>{2}), Error);
}

TEST_CASE("softmax rows sum to one and log_softmax matches log(softmax)") {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const Tensor x = mt::random_tensor(rng, {4, 6}, -15, 15);
    const Tensor s = ad::softmax(x, 1);
    const Tensor ls = ad::log_softmax(x, 1);
    for (std::size_t r = 0; r < 4; ++r) {
      double total = 0;
      for (std::size_t c = 0; c < 6; ++c) {
        total += s[r * 6 + c];
        CHECK(std::abs(ls[r * 6 + c] - std::log(s[r * 6 + c])) < 1e-10);
      }
      CHECK(std::abs(total - 1.0) < 1e-12);
    }
  }
}

TEST_CASE("layer_norm on a constant row returns the bias") {
  const Tensor x = Tensor::constant({1, 4}, {3, 3, 3, 3});
  const Tensor gain = Tensor::constant({4}, {2, 2, 2, 2});
  const Tensor bias = Tensor::constant({4}, {0.1, -0.2, 0.3, 0.4});
  const Tensor y = ad::layer_norm(x, gain, bias);
  // centered = 0, var = 0, so output = 0 * gain / sqrt(eps) + bias exactly.
  for (std::size_t i = 0; i < 4; ++i) CHECK(y[i] == bias[i]);
  for (double v : y.data()) CHECK(std::isfinite(v));
}

TEST_CASE("dropout") {
  Rng rng(2);
  const Tensor x = mt::random_tensor(rng, {5, 5});
  CHECK(ad::dropout(x, 0.0, RngStream(1, "d"), true).values() == x.values());
  CHECK(ad::dropout(x, 0.5, RngStream(1, "d"), false).values() == x.values());

  const Tensor a = ad::dropout(x, 0.4, RngStream(9, "d"), true);
  const Tensor b = ad::dropout(x, 0.4, RngStream(9, "d"), true);
  const Tensor c = ad::dropout(x, 0.4, RngStream(10, "d"), true);
  CHECK(a.values() == b.values());
  CHECK(a.values() != c.values());
  for (std::size_t i = 0; i < x.size(); ++i) {
    CHECK((a[i] == 0.0 || a[i] == doctest::Approx(x[i] / 0.6)));
  }
  CHECK_THROWS_AS(ad::dropout(x, 1.0, RngStream(1), true), Error);
}

TEST_CASE("embedding lookup rejects out-of-range ids") {
  const Tensor table = Tensor::zeros({3, 2});
  CHECK_THROWS_AS(ad::embedding_lookup(table, std::vector<int>{3}), Error);
  CHECK_THROWS_AS(ad::embedding_lookup(table, std::vector<int>{-1}), Error);
}

TEST_CASE("every op matches central finite differences") {
  for (const auto& op : mt::op_catalog()) {
    Rng rng(mt::hash_string_for_tests(op.name));
    for (int instance = 0; instance < 20; ++instance) {
      const auto inputs = op.inputs(rng);
      const double err = mt::gradient_error(op.fn, inputs);
      INFO(op.name << " instance " << instance << " rel err " << err);
      CHECK(err < 1e-5);
    }
  }
}

TEST_CASE("grad of grad matches finite differences of the gradient") {
  std::uint64_t seed = 100;
  for (const auto& op : mt::second_order_catalog()) {
    Rng rng(seed);
    for (int instance = 0; instance < 20; ++instance) {
      const auto inputs = op.inputs(rng);
      const double err = mt::hessian_vector_error(op.fn, inputs, ++seed);
      INFO(op.name << " instance " << instance << " rel err " << err);
      CHECK(err < 1e-4);
    }
  }
}

TEST_CASE("global norm clipping") {
  const std::vector<Tensor> g{Tensor::constant({2}, {3, 4})};
  CHECK(ad::global_norm(g) == doctest::Approx(5.0));
  const auto clipped = ad::clip_by_global_norm(g, 1.0);
  CHECK(clipped[0][0] == doctest::Approx(0.6));
  CHECK(clipped[0][1] == doctest::Approx(0.8));

  const std::vector<Tensor> small{Tensor::constant({1}, {0.1})};
  CHECK(ad::clip_by_global_norm(small, 1.0)[0].values() == std::vector<double>{0.1});
  CHECK(ad::global_norm(std::vector<Tensor>{}) == 0.0);

  Rng rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    const double spread = trial < 10 ? 0.01 : 1.0;
    const std::vector<Tensor> big{mt::random_tensor(rng, {1000}, -spread, spread)};
    const double before = ad::global_norm(big);
    const double after = ad::global_norm(ad::clip_by_global_norm(big, 1.0));
    CHECK(std::abs(after - std::min(before, 1.0)) < 1e-12);
  }
}

TEST_CASE("evaluation is deterministic") {
  auto run = [] {
    Rng rng(4);
    const Tensor w = mt::random_tensor(rng, {4, 4}).as_parameter();
    const Tensor x = mt::random_tensor(rng, {3, 4});
    const Tensor h = ad::dropout(ad::tanh(ad::matmul(x, w)), 0.2, RngStream(5, "det"), true);
    const Tensor loss = ad::sum(ad::square(h));
    return ad::grad(loss, std::vector<Tensor>{w})[0].values();
  };
  CHECK(run() == run());
}
