// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The lorafa Authors

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "errors.hpp"
#include "optim.hpp"

using namespace lorafa;

namespace {

struct Scalar {
  Tensor p = Tensor({1}, {1.0});
  std::vector<ParameterRef> refs() { return {{"p", &p, true}}; }
};

GradientSet grad(double g) { return {{"p", Tensor({1}, {g})}}; }

}  // namespace

TEST_CASE("sgd") {
  Scalar s;
  sgd_step(s.refs(), grad(0.0), {0.1});
  CHECK(s.p[0] == 1.0);
  sgd_step(s.refs(), grad(2.0), {0.1});
  CHECK(s.p[0] == doctest::Approx(0.8).epsilon(1e-15));
  CHECK_THROWS_AS(sgd_step(s.refs(), GradientSet{{"p", Tensor({2})}}, {0.1}), Error);
  CHECK_THROWS_AS(SgdConfig{0.0}.validate(), Error);
}

TEST_CASE("sgd ignores frozen parameters") {
  Tensor frozen({1}, {5.0});
  std::vector<ParameterRef> refs{{"f", &frozen, false}};
  sgd_step(refs, GradientSet{}, {0.1});
  CHECK(frozen[0] == 5.0);
}

TEST_CASE("adamw first step has magnitude eta") {
  for (double g : {2.0, -0.3, 1e-3}) {
    Scalar s;
    AdamWState state;
    adamw_step(s.refs(), grad(g), state, {0.01});
    const double expected = 1.0 - 0.01 * g / (std::abs(g) + 1e-8);
    CHECK(s.p[0] == doctest::Approx(expected).epsilon(1e-12));
    CHECK(state.step() == 1);
  }
}

TEST_CASE("adamw with zero gradient and no decay is a no-op") {
  Scalar s;
  AdamWState state;
  for (int i = 0; i < 5; ++i) adamw_step(s.refs(), grad(0.0), state, {0.01});
  CHECK(s.p[0] == 1.0);
}

TEST_CASE("adamw decoupled weight decay") {
  Scalar s;
  AdamWState state;
  AdamWConfig cfg{0.1};
  cfg.weight_decay = 0.5;
  adamw_step(s.refs(), grad(0.0), state, cfg);
  CHECK(s.p[0] == doctest::Approx(1.0 - 0.1 * 0.5).epsilon(1e-15));
}

TEST_CASE("adamw state covers exactly the trainable set") {
  ModelConfig c;
  c.d = 8;
  c.layers = 1;
  c.heads = 2;
  c.vocab = 11;
  c.seq_len = 4;
  c.batch = 1;
  for (auto mode : {AdaptationMode::FullFineTune, AdaptationMode::LoRA, AdaptationMode::LoRAFA}) {
    auto m = TransformerModel::build(c, {mode, 2, {}, 1.0}, 0);
    TokenBatch b{1, 4, {3, 4, 5, 6}, {4, 5, 6, -1}};
    AdamWState state;
    adamw_step(m.trainable_parameters(), m.backward(m.forward_loss(b).tape), state, {1e-3});
    CHECK(state.element_count() == 2 * m.count_trainable().full);
    for (auto& p : m.trainable_parameters()) {
      REQUIRE(state.moments().count(p.name) == 1);
      CHECK(state.moments().at(p.name).m.shape() == p.value->shape());
      CHECK(state.moments().at(p.name).v.shape() == p.value->shape());
    }
  }
}

TEST_CASE("adamw rejects mismatched state") {
  Scalar s;
  AdamWState state;
  adamw_step(s.refs(), grad(1.0), state, {0.01});
  Tensor other({3});
  std::vector<ParameterRef> refs{{"q", &other, true}};
  try {
    adamw_step(refs, GradientSet{{"q", Tensor({3})}}, state, {0.01});
    FAIL("expected a state error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::State);
  }
  AdamWConfig bad{0.01};
  bad.beta1 = 1.0;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = AdamWConfig{0.01};
  bad.eps = 0.0;
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("updates are deterministic") {
  Scalar a, b;
  AdamWState sa, sb;
  for (double g : {0.5, -1.0, 2.0}) {
    adamw_step(a.refs(), grad(g), sa, {0.01});
    adamw_step(b.refs(), grad(g), sb, {0.01});
  }
  CHECK(a.p == b.p);
}
