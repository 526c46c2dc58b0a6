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

#include "common/error.hpp"
#include "optim/optim.hpp"

using namespace metaloop;
using ad::Tensor;

namespace {

ParamSet scalar_set(double v) { return ParamSet({{"p", Tensor::parameter({}, {v})}}); }

}  // namespace

TEST_CASE("sgd_step examples") {
  const ParamSet p({{"p", Tensor::constant({2}, {1, 1})}});
  const ParamSet g({{"p", Tensor::constant({2}, {1, -1})}});
  CHECK(sgd_step(p, g, 0.5).at("p").values() == std::vector<double>{0.5, 1.5});
  CHECK(sgd_step(p, zeros_like(p), 0.5).at("p").values() == p.at("p").values());

  ParamSet x = scalar_set(1.0);
  for (int k = 0; k < 3; ++k) x = sgd_step(x, ParamSet({{"p", x.at("p")}}), 0.1);
  CHECK(x.at("p").item() == doctest::Approx(0.729).epsilon(1e-14));
}

TEST_CASE("adamax zero gradient on fresh state leaves params unchanged") {
  const ParamSet p = scalar_set(1.0);
  const auto r = adamax_step(AdamaxState::fresh(p), p, zeros_like(p), 0.1);
  CHECK(r.params.at("p").item() == 1.0);
  CHECK(r.state.t == 1);
}

TEST_CASE("adamax single step by hand") {
  const ParamSet p = scalar_set(1.0);
  const ParamSet g({{"p", Tensor::constant({}, {0.5})}});
  const auto r = adamax_step(AdamaxState::fresh(p), p, g, 0.1);
  CHECK(std::abs(r.state.m.at("p").item() - 0.05) < 1e-15);
  CHECK(r.state.u.at("p").item() == 0.5);
  const double expected = 1.0 - (0.1 / (1.0 - 0.9)) * 0.05 / (0.5 + 1e-8);
  CHECK(std::abs(r.params.at("p").item() - expected) < 1e-12);
  CHECK(r.params.at("p").item() == doctest::Approx(0.9).epsilon(1e-6));
  CHECK(r.params.at("p").requires_grad());
  CHECK(r.params.version() == p.version() + 1);
}

TEST_CASE("adamax two steps with constant gradient") {
  ParamSet p = scalar_set(1.0);
  const ParamSet g({{"p", Tensor::constant({}, {1.0})}});
  auto r1 = adamax_step(AdamaxState::fresh(p), p, g, 0.1);
  const double step1 = (0.1 / (1 - 0.9)) * 0.1 / (1.0 + 1e-8);
  CHECK(std::abs(r1.params.at("p").item() - (1.0 - step1)) < 1e-12);
  auto r2 = adamax_step(r1.state, r1.params, g, 0.1);
  CHECK(std::abs(r2.state.m.at("p").item() - 0.19) < 1e-15);
  CHECK(r2.state.u.at("p").item() == 1.0);
  const double step2 = (0.1 / (1 - 0.81)) * 0.19 / (1.0 + 1e-8);
  CHECK(std::abs(r2.params.at("p").item() - (1.0 - step1 - step2)) < 1e-12);
}

TEST_CASE("adamax is pure and replayable") {
  const ParamSet p0({{"a", Tensor::parameter({3}, {0.1, -0.2, 0.3})}});
  const std::vector<std::vector<double>> gs = {{1, -2, 0.5}, {0.2, 0.1, -3}, {0, 0, 0}};
  auto replay = [&] {
    AdamaxState s = AdamaxState::fresh(p0);
    ParamSet p = p0;
    for (const auto& g : gs) {
      auto r = adamax_step(s, p, ParamSet({{"a", Tensor::constant({3}, g)}}), 0.01);
      p = r.params;
      s = r.state;
    }
    return p;
  };
  CHECK(replay().bit_equal(replay()));

  AdamaxState s = AdamaxState::fresh(p0);
  const auto before = s.u.at("a").values();
  adamax_step(s, p0, ParamSet({{"a", Tensor::constant({3}, gs[0])}}), 0.01);
  CHECK(s.u.at("a").values() == before);
  CHECK(s.t == 0);
}

TEST_CASE("adamax u is non-negative and tracks max") {
  ParamSet p = scalar_set(0.0);
  AdamaxState s = AdamaxState::fresh(p);
  double prev = 0;
  for (double g : {-1.0, 0.5, 2.0, -0.1}) {
    auto r = adamax_step(s, p, ParamSet({{"p", Tensor::constant({}, {g})}}), 0.01);
    const double u = r.state.u.at("p").item();
    CHECK(u >= 0);
    CHECK(u == std::max(0.999 * prev, std::abs(g)));
    prev = u;
    p = r.params;
    s = r.state;
  }
}

TEST_CASE("adamax rejects misaligned gradients") {
  const ParamSet p = scalar_set(1.0);
  const ParamSet g({{"q", Tensor::constant({}, {1.0})}});
  CHECK_THROWS_AS(adamax_step(AdamaxState::fresh(p), p, g, 0.1), Error);
}

TEST_CASE("lr_at examples") {
  const ScheduleSpec s{1.0, 1000, 0.1};
  CHECK(s.warmup_steps() == 100);
  CHECK(lr_at(100, s) == doctest::Approx(1.0));
  CHECK(lr_at(50, s) == doctest::Approx(0.5));
  CHECK(lr_at(550, s) == doctest::Approx(0.5));
  CHECK(lr_at(1000, s) == 0.0);
  CHECK(lr_at(0, s) == 0.0);
  CHECK_THROWS_AS(lr_at(1001, s), Error);
  CHECK_THROWS_AS(lr_at(-1, s), Error);

  const ScheduleSpec no_warmup{2.0, 10, 0.0};
  CHECK(lr_at(0, no_warmup) == 2.0);
  CHECK(lr_at(5, no_warmup) == doctest::Approx(1.0));

  CHECK_THROWS_AS((ScheduleSpec{1.0, 0, 0.1}.validate()), Error);
  CHECK_THROWS_AS((ScheduleSpec{1.0, 10, 1.0}.validate()), Error);
}

TEST_CASE("lr_at peaks at the configured value") {
  const ScheduleSpec s{3e-4, 37, 0.1};
  double best = 0;
  for (std::int64_t k = 0; k <= 37; ++k) best = std::max(best, lr_at(k, s));
  CHECK(best == doctest::Approx(3e-4));
}

TEST_CASE("checkpoint round trip with optimizer state") {
  ParamSet p({{"enc/w", Tensor::parameter({2, 2}, {1, 2, 3, 4})},
              {"head/t/b", Tensor::parameter({2}, {0, 0})}});
  const GradSet g({{"enc/w", Tensor::constant({2, 2}, {0.1, -0.1, 0.2, 0.3})},
                   {"head/t/b", Tensor::constant({2}, {1, -1})}});
  auto r = adamax_step(AdamaxState::fresh(p), p, g, 0.01);
  const auto path = std::filesystem::temp_directory_path() / "metaloop_optim_ckpt.mlps";
  save_checkpoint(path.string(), r.params, &r.state);
  const Checkpoint c = load_checkpoint(path.string());
  CHECK(c.params.bit_equal(r.params));
  REQUIRE(c.optimizer.has_value());
  CHECK(c.optimizer->t == 1);
  CHECK(c.optimizer->m.bit_equal(r.state.m));
  CHECK(c.optimizer->u.bit_equal(r.state.u));
  CHECK(c.params.at("enc/w").requires_grad());

  save_checkpoint(path.string(), p);
  CHECK_FALSE(load_checkpoint(path.string()).optimizer.has_value());
  std::filesystem::remove(path);
}
