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

#include "ibsc/synthgen.hpp"

#include <algorithm>
#include <array>
#include <random>
#include <set>
#include <string>

#include "ibsc/errors.hpp"

namespace ibsc {

namespace {

void validate_config(const SynthConfig& c) {
  if (c.seen_classes < 2) throw ValidationError("seen_classes must be >= 2");
  if (c.unseen_classes < 1) throw ValidationError("unseen_classes must be >= 1");
  if (c.attributes < 1) throw ValidationError("attributes must be >= 1");
  if (c.block_width < 1) throw ValidationError("block_width must be >= 1");
  if (c.environment_dims < 0) throw ValidationError("environment_dims must be >= 0");
  if (c.samples_per_class < 1) throw ValidationError("samples_per_class must be >= 1");
  if (!(c.sigma_noise >= 0)) throw ValidationError("sigma_noise must be >= 0");
  if (!(c.attr_noise >= 0)) throw ValidationError("attr_noise must be >= 0");
}

// Distinct rows, and every unseen value present among the seen classes, so
// every attribute splice has a possible donor.
bool admissible(const Matrix& bits, int seen_classes) {
  const std::size_t K = bits.rows(), d = bits.cols();
  std::set<std::vector<double>> rows;
  for (std::size_t i = 0; i < K; ++i) {
    const auto row = bits.row(i);
    if (!rows.insert(std::vector<double>(row.begin(), row.end())).second) return false;
  }
  for (std::size_t a = 0; a < d; ++a) {
    bool seen0 = false, seen1 = false;
    for (int c = 0; c < seen_classes; ++c) {
      (bits(static_cast<std::size_t>(c), a) == 0.0 ? seen0 : seen1) = true;
    }
    for (std::size_t c = static_cast<std::size_t>(seen_classes); c < K; ++c) {
      if (bits(c, a) == 0.0 ? !seen0 : !seen1) return false;
    }
  }
  return true;
}

}  // namespace

SynthOutput generate_synthetic(const SynthConfig& config) {
  validate_config(config);
  const int K = config.seen_classes + config.unseen_classes;
  const std::size_t d = static_cast<std::size_t>(config.attributes);
  const std::size_t g = static_cast<std::size_t>(config.block_width);
  const std::size_t e = static_cast<std::size_t>(config.environment_dims);
  const std::size_t p = d * g + e;

  std::mt19937_64 rng(config.seed);
  std::uniform_int_distribution<int> coin(0, 1);
  std::normal_distribution<double> gauss(0.0, 1.0);

  Matrix bits(static_cast<std::size_t>(K), d);
  bool ok = false;
  for (int attempt = 0; attempt < 1000; ++attempt) {
    for (double& v : bits.data()) v = static_cast<double>(coin(rng));
    if (admissible(bits, config.seen_classes)) {
      ok = true;
      break;
    }
  }
  if (!ok) {
    throw ValidationError(
        "could not draw an admissible binary attribute table in 1000 attempts; "
        "increase attributes or reduce classes");
  }

  // Shared per-attribute templates: one block of values per attribute value.
  std::vector<std::array<std::vector<double>, 2>> templates(d);
  for (std::size_t a = 0; a < d; ++a) {
    for (int v = 0; v < 2; ++v) {
      templates[a][static_cast<std::size_t>(v)].resize(g);
      const double sign = v == 0 ? -1.0 : 1.0;
      for (std::size_t q = 0; q < g; ++q) {
        templates[a][static_cast<std::size_t>(v)][q] = sign + 0.1 * gauss(rng);
      }
    }
  }

  Matrix centers(static_cast<std::size_t>(K), p);
  for (int c = 0; c < K; ++c) {
    const std::size_t cc = static_cast<std::size_t>(c);
    for (std::size_t a = 0; a < d; ++a) {
      const auto& tmpl = templates[a][static_cast<std::size_t>(bits(cc, a))];
      for (std::size_t q = 0; q < g; ++q) centers(cc, a * g + q) = tmpl[q];
    }
    for (std::size_t q = 0; q < e; ++q) centers(cc, d * g + q) = gauss(rng);
  }

  const std::size_t n = static_cast<std::size_t>(K) * static_cast<std::size_t>(config.samples_per_class);
  Dataset ds;
  ds.features = Matrix(n, p);
  ds.labels.resize(n);
  for (int c = 0; c < K; ++c) {
    for (int s = 0; s < config.samples_per_class; ++s) {
      const std::size_t row =
          static_cast<std::size_t>(c) * static_cast<std::size_t>(config.samples_per_class) +
          static_cast<std::size_t>(s);
      ds.labels[row] = c;
      for (std::size_t j = 0; j < p; ++j) {
        ds.features(row, j) = centers(static_cast<std::size_t>(c), j) +
                              config.sigma_noise * gauss(rng);
      }
    }
  }
  for (int c = 0; c < K; ++c) ds.class_names.push_back("class_" + std::to_string(c));

  AttributeTable attrs;
  attrs.binary = bits;
  attrs.continuous = Matrix(static_cast<std::size_t>(K), d);
  std::uniform_real_distribution<double> blur(-config.attr_noise, config.attr_noise);
  for (std::size_t c = 0; c < static_cast<std::size_t>(K); ++c) {
    for (std::size_t a = 0; a < d; ++a) {
      const double jitter = config.attr_noise > 0 ? blur(rng) : 0.0;
      attrs.continuous(c, a) = std::clamp(bits(c, a) + jitter, 0.0, 1.0);
    }
  }

  SplitSpec split;
  for (int c = 0; c < config.seen_classes; ++c) split.seen.insert(c);
  for (int c = config.seen_classes; c < K; ++c) split.unseen.insert(c);

  RelationMatrix truth;
  truth.R = Matrix(d, p, 0.0);
  for (std::size_t a = 0; a < d; ++a) {
    for (std::size_t q = 0; q < g; ++q) truth.R(a, a * g + q) = 1.0;
  }

  SynthOutput out;
  out.dataset = std::move(ds);
  out.attrs = std::move(attrs);
  out.split = std::move(split);
  out.ground_truth = std::move(truth);
  out.class_centers = std::move(centers);
  validate_inputs(out.dataset, out.attrs, out.split);
  return out;
}

}  // namespace ibsc
