/*
 * Copyright 2026 The GLS Correction Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <cmath>

#include <doctest.h>

#include "gls/error.hpp"
#include "gls/learner.hpp"
#include "gradcheck.hpp"

using gls::Framework;

namespace {

gls::ShiftScenario small_scenario(double shift) {
  gls::ScenarioParams p;
  p.num_classes = 3;
  p.dim = 2;
  p.shift = shift;
  p.source_labels = gls::DiscreteDistribution({0.5, 0.3, 0.2});
  p.target_labels = gls::DiscreteDistribution({0.2, 0.3, 0.5});
  p.seed = 4;
  return gls::make_scenario(p);
}

}  // namespace

TEST_CASE("model init, flatten and assign") {
  gls::Rng rng(1);
  auto m = gls::ModelParams::init(3, {5, 4}, 2, 3, gls::Activation::kTanh, rng);
  CHECK(m.input_dim() == 3);
  CHECK(m.z_dim() == 2);
  CHECK(m.num_classes() == 3);
  CHECK(m.num_parameters() == 3 * 5 + 5 + 5 * 4 + 4 + 4 * 2 + 2 + 2 * 3 + 3);
  const Eigen::VectorXd flat = m.flatten();
  auto z = m.zeros_like();
  CHECK(z.flatten().norm() == 0.0);
  z.assign(flat);
  CHECK(z.flatten() == flat);
  z.axpy(-1.0, m);
  CHECK(z.flatten().norm() == 0.0);
  CHECK_THROWS_AS(z.assign(Eigen::VectorXd::Zero(3)), gls::ValidationError);
  // Glorot bound on the first layer.
  const double bound = std::sqrt(6.0 / 8.0);
  CHECK(m.g_layers[0].weight.cwiseAbs().maxCoeff() <= bound);
}

TEST_CASE("forward pass produces row-stochastic probabilities") {
  gls::Rng rng(2);
  const auto m = gls::ModelParams::init(2, {4}, 3, 3, gls::Activation::kLeakyRelu, rng);
  const Eigen::MatrixXd x = Eigen::MatrixXd::NullaryExpr(7, 2, [&] { return rng.normal(); });
  const auto f = gls::forward(m, x);
  CHECK(f.z.cols() == 3);
  for (Eigen::Index i = 0; i < 7; ++i) CHECK(f.probs.row(i).sum() == doctest::Approx(1.0));
  CHECK_THROWS_AS(gls::forward(m, Eigen::MatrixXd::Zero(2, 5)), gls::ValidationError);
  auto bad = m;
  bad.g_layers[0].weight(0, 0) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(gls::forward(bad, x), gls::NumericError);
}

TEST_CASE("weighted risk, pseudo labels and accuracy") {
  Eigen::MatrixXd probs(2, 2);
  probs << 0.8, 0.2, 0.5, 0.5;
  const double r = gls::weighted_risk(probs, {0, 1}, std::vector<double>{2.0, 0.5});
  CHECK(r == doctest::Approx(0.5 * (2.0 * -std::log(0.8) + 0.5 * -std::log(0.5))));
  Eigen::MatrixXd zero(1, 2);
  zero << 1.0, 0.0;
  CHECK(gls::weighted_risk(zero, {1}, std::vector<double>{1.0, 1.0}) ==
        doctest::Approx(-std::log(1e-12)));
  CHECK(gls::pseudo_label(probs) == std::vector<int>{0, 0});  // tie → 0
  CHECK(gls::accuracy({0, 1, 1}, {0, 1, 0}) == doctest::Approx(2.0 / 3.0));
  CHECK_THROWS_AS(gls::accuracy({0}, {0, 1}), gls::ValidationError);
}

TEST_CASE("objective gradients match finite differences") {
  gls::Rng rng(77);
  for (int t = 0; t < 10; ++t) {
    const auto inst = gls::testing::random_instance(rng);
    for (Framework f : {Framework::kCovariate, Framework::kLabelOnly,
                        Framework::kConditionalOnly, Framework::kGls}) {
      CHECK(gls::testing::gradient_relative_error(f, inst) < 1e-4);
    }
  }
}

TEST_CASE("objective terms per framework") {
  gls::Rng rng(5);
  auto inst = gls::testing::random_instance(rng);
  const gls::ObjectiveInputs in{&inst.xs, &inst.ys, &inst.xt, &inst.yt};
  const auto label = gls::objective(Framework::kLabelOnly, inst.model, in, inst.w,
                                    inst.kernel, inst.lambda);
  CHECK(label.discrepancy == 0.0);
  CHECK(label.loss == doctest::Approx(label.risk));
  const auto f = gls::forward(inst.model, inst.xs);
  CHECK(label.risk == doctest::Approx(gls::weighted_risk(f.probs, inst.ys, inst.w)));
  const auto cov = gls::objective(Framework::kCovariate, inst.model, in, inst.w,
                                  inst.kernel, inst.lambda);
  CHECK(cov.risk == doctest::Approx(gls::weighted_risk(
                        f.probs, inst.ys,
                        std::vector<double>(inst.w.num_classes(), 1.0))));
  CHECK(cov.loss == doctest::Approx(cov.risk + inst.lambda * cov.discrepancy));
  const gls::ObjectiveInputs no_target{&inst.xs, &inst.ys, nullptr, nullptr};
  CHECK_THROWS_AS(gls::objective(Framework::kGls, inst.model, no_target, inst.w,
                                 inst.kernel, inst.lambda),
                  gls::ValidationError);
}

TEST_CASE("train config defaults and validation") {
  gls::TrainConfig c;
  CHECK(c.resolved_warmup() == 40);
  c.max_iters = 100;
  CHECK(c.resolved_warmup() == 20);
  c.warmup_epochs = 5;
  CHECK(c.resolved_warmup() == 5);
  CHECK(c.resolved_batch_size(1500) == 1500);
  CHECK(c.resolved_batch_size(5000) == 256);
  c.learning_rate = 0.0;
  CHECK_THROWS_AS(c.validate(), gls::ValidationError);
  CHECK(gls::framework_from_string("conditionalOnly") == Framework::kConditionalOnly);
  CHECK_THROWS_AS(gls::framework_from_string("dann"), gls::ValidationError);
}

TEST_CASE("training is deterministic and records a full trace") {
  const auto sc = small_scenario(0.5);
  const auto s = gls::sample(sc.source, 300, 1);
  const auto t = gls::sample(sc.target, 300, 2, gls::DomainTag::kTarget);
  gls::TrainConfig c;
  c.max_iters = 30;
  const auto a = gls::train(s, t, c);
  const auto b = gls::train(s, t, c);
  CHECK(a.model.flatten() == b.model.flatten());
  CHECK(a.weights.w == b.weights.w);
  REQUIRE(a.trace.rows.size() == 30);
  CHECK(a.trace.warmup_epochs == 6);
  CHECK(a.trace.rows[5].warmup);
  CHECK_FALSE(a.trace.rows[6].warmup);
  CHECK_NOTHROW(a.weights.validate());
  CHECK(a.trace.rows.back().src_acc > 0.8);
  // Warm-up leaves w at ones; label shift moves it afterwards.
  c.max_iters = 6;
  c.warmup_epochs = 6;
  const auto warm = gls::train(s, t, c);
  for (double v : warm.weights.w) CHECK(v == 1.0);
}

TEST_CASE("minibatch training path") {
  const auto sc = small_scenario(0.5);
  const auto s = gls::sample(sc.source, 200, 1);
  const auto t = gls::sample(sc.target, 150, 2, gls::DomainTag::kTarget);
  gls::TrainConfig c;
  c.max_iters = 8;
  c.batch_size = 64;
  c.pseudo_label_threshold = 0.4;
  const auto r = gls::train(s, t, c);
  CHECK(r.trace.rows.size() == 8);
  CHECK(std::isfinite(r.trace.rows.back().loss));
}

TEST_CASE("divergent training raises with the partial trace") {
  const auto sc = small_scenario(0.5);
  const auto s = gls::sample(sc.source, 100, 1);
  const auto t = gls::sample(sc.target, 100, 2, gls::DomainTag::kTarget);
  gls::TrainConfig c;
  c.max_iters = 50;
  c.activation = gls::Activation::kIdentity;
  c.learning_rate = 1e6;
  try {
    gls::train(s, t, c);
    FAIL("expected divergence");
  } catch (const gls::TrainingDiverged& e) {
    CHECK(e.trace().rows.size() < 50);
  }
}
