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

// End-to-end runs on the shipped fixtures, driven the same way as
// `glsctl train --seed s`.

#include <cmath>
#include <string>

#include <doctest.h>

#include "gls/cli/commands.hpp"
#include "gls/cli/config.hpp"

TEST_CASE("gls recovers the oracle weights on the 1-D label shift fixture") {
  const auto cfg = gls::cli::load_config(
      std::string(GLS_FIXTURE_DIR) + "/label_shift_1d.json", {}, std::nullopt, std::nullopt);
  const std::vector<double> w_star = {2.0 / 3.0, 1.5};
  int close = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto data = gls::cli::load_or_generate(cfg, seed, cfg.samples.rate);
    gls::TrainConfig t = cfg.train;
    t.seed = gls::cli::train_seed(seed);
    const auto r = gls::train(data.source, data.target, t);
    double err = 0.0;
    for (int y = 0; y < 2; ++y) err = std::max(err, std::fabs(r.weights.w[y] - w_star[y]));
    MESSAGE("seed " << seed << ": |w - w*|_inf = " << err);
    close += err <= 0.15;
  }
  CHECK(close >= 8);
}
