// Copyright 2026 The IBSC Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "ibsc/errors.hpp"
#include "ibsc/relation.hpp"
#include "ibsc/synthgen.hpp"

using namespace ibsc;

namespace {

SynthConfig small_config() {
  SynthConfig cfg;
  cfg.seen_classes = 6;
  cfg.unseen_classes = 2;
  cfg.attributes = 5;
  cfg.block_width = 3;
  cfg.environment_dims = 7;
  cfg.samples_per_class = 4;
  cfg.seed = 17;
  return cfg;
}

}  // namespace

TEST_CASE("generated shapes, labels and split follow the config") {
  const SynthConfig cfg = small_config();
  const SynthOutput out = generate_synthetic(cfg);

  const std::size_t K = 8, d = 5, p = 5 * 3 + 7;
  CHECK(out.dataset.n() == K * 4);
  CHECK(out.dataset.p() == p);
  CHECK(out.attrs.num_classes() == K);
  CHECK(out.attrs.num_attributes() == d);
  CHECK(out.class_centers.rows() == K);
  CHECK(out.class_centers.cols() == p);
  CHECK(out.dataset.class_names.size() == K);
  CHECK(out.dataset.class_names[3] == "class_3");

  // Samples are grouped by class in label order.
  for (std::size_t i = 0; i < out.dataset.n(); ++i) {
    CHECK(out.dataset.labels[i] == static_cast<int>(i / 4));
  }
  CHECK(out.split.seen == std::set<int>{0, 1, 2, 3, 4, 5});
  CHECK(out.split.unseen == std::set<int>{6, 7});

  // Ground truth maps attribute a to the contiguous block [3a, 3a+3).
  for (std::size_t a = 0; a < d; ++a) {
    for (std::size_t j = 0; j < p; ++j) {
      const double expect = (j >= a * 3 && j < a * 3 + 3) ? 1.0 : 0.0;
      CHECK(out.ground_truth.R(a, j) == expect);
    }
  }
  const std::set<int> env = environment_dims(out.ground_truth);
  CHECK(env.size() == 7);
  CHECK(*env.begin() == 15);
}

TEST_CASE("generation is deterministic in the seed") {
  const SynthConfig cfg = small_config();
  const SynthOutput a = generate_synthetic(cfg);
  const SynthOutput b = generate_synthetic(cfg);
  CHECK(a.dataset.features == b.dataset.features);
  CHECK(a.attrs.binary == b.attrs.binary);
  CHECK(a.attrs.continuous == b.attrs.continuous);
  CHECK(a.class_centers == b.class_centers);

  SynthConfig other = cfg;
  other.seed = 18;
  const SynthOutput c = generate_synthetic(other);
  CHECK(a.dataset.features != c.dataset.features);
}

TEST_CASE("zero sample noise reproduces the class centers exactly") {
  SynthConfig cfg = small_config();
  cfg.sigma_noise = 0.0;
  const SynthOutput out = generate_synthetic(cfg);
  for (std::size_t i = 0; i < out.dataset.n(); ++i) {
    const std::size_t c = static_cast<std::size_t>(out.dataset.labels[i]);
    for (std::size_t j = 0; j < out.dataset.p(); ++j) {
      CHECK(out.dataset.features(i, j) == out.class_centers(c, j));
    }
  }
}

TEST_CASE("continuous attributes are the binary table blurred within attr_noise") {
  SynthConfig cfg = small_config();
  cfg.attr_noise = 0.0;
  const SynthOutput exact = generate_synthetic(cfg);
  CHECK(exact.attrs.continuous == exact.attrs.binary);

  cfg.attr_noise = 0.05;
  const SynthOutput blurred = generate_synthetic(cfg);
  for (std::size_t c = 0; c < blurred.attrs.num_classes(); ++c) {
    for (std::size_t a = 0; a < blurred.attrs.num_attributes(); ++a) {
      const double v = blurred.attrs.continuous(c, a);
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
      CHECK(std::abs(v - blurred.attrs.binary(c, a)) <= 0.05);
    }
  }
}

TEST_CASE("binary attribute rows are distinct and unseen values have seen donors") {
  const SynthOutput out = generate_synthetic(small_config());
  const Matrix& bits = out.attrs.binary;

  std::set<std::vector<double>> rows;
  for (std::size_t c = 0; c < bits.rows(); ++c) {
    const auto row = bits.row(c);
    CHECK(rows.insert(std::vector<double>(row.begin(), row.end())).second);
  }
  for (int u : out.split.unseen) {
    for (std::size_t a = 0; a < bits.cols(); ++a) {
      bool covered = false;
      for (int s : out.split.seen) {
        if (bits(static_cast<std::size_t>(s), a) == bits(static_cast<std::size_t>(u), a)) {
          covered = true;
          break;
        }
      }
      CHECK(covered);
    }
  }
}

TEST_CASE("classes sharing an attribute value share that attribute's template block") {
  const SynthOutput out = generate_synthetic(small_config());
  const Matrix& bits = out.attrs.binary;
  const std::size_t g = 3;
  for (std::size_t a = 0; a < bits.cols(); ++a) {
    for (std::size_t c1 = 0; c1 < bits.rows(); ++c1) {
      for (std::size_t c2 = c1 + 1; c2 < bits.rows(); ++c2) {
        bool equal = true;
        for (std::size_t q = 0; q < g; ++q) {
          if (out.class_centers(c1, a * g + q) != out.class_centers(c2, a * g + q)) {
            equal = false;
            break;
          }
        }
        CHECK(equal == (bits(c1, a) == bits(c2, a)));
      }
    }
  }
}

TEST_CASE("config validation rejects out-of-range settings") {
  SynthConfig cfg = small_config();
  cfg.seen_classes = 1;
  CHECK_THROWS_AS(generate_synthetic(cfg), ValidationError);
  cfg = small_config();
  cfg.unseen_classes = 0;
  CHECK_THROWS_AS(generate_synthetic(cfg), ValidationError);
  cfg = small_config();
  cfg.block_width = 0;
  CHECK_THROWS_AS(generate_synthetic(cfg), ValidationError);
  cfg = small_config();
  cfg.sigma_noise = -0.1;
  CHECK_THROWS_AS(generate_synthetic(cfg), ValidationError);
  cfg = small_config();
  cfg.samples_per_class = 0;
  CHECK_THROWS_AS(generate_synthetic(cfg), ValidationError);
}
