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

#pragma once

#include <cstdint>

#include "ibsc/dataset.hpp"
#include "ibsc/relation.hpp"

namespace ibsc {

// Synthetic task family with a known attribute-to-feature ground truth.
// Each attribute i owns a contiguous block of block_width feature dims whose
// values come from one of two shared templates (one per attribute value,
// entries ~ value-sign 1 + 0.1 jitter); the remaining environment dims are a
// per-class standard normal vector.  Samples are the class center plus
// isotropic sigma_noise.  Continuous attributes are the binary ones blurred
// by uniform +-attr_noise and clipped to [0, 1].
struct SynthConfig {
  int seen_classes = 20;
  int unseen_classes = 5;
  int attributes = 12;
  int block_width = 8;
  int environment_dims = 32;
  int samples_per_class = 30;
  double sigma_noise = 0.3;
  double attr_noise = 0.05;
  std::uint64_t seed = 0;
};

struct SynthOutput {
  Dataset dataset;
  AttributeTable attrs;
  SplitSpec split;
  RelationMatrix ground_truth;  // d x p block structure actually used
  Matrix class_centers;         // K x p, before sample noise
};

// Deterministic for a fixed config.  Binary attribute rows are redrawn (at
// most 1000 times) until all rows are distinct and every unseen attribute
// value also occurs among the seen classes; then templates, environment
// vectors, samples and continuous attributes are drawn in that order.
SynthOutput generate_synthetic(const SynthConfig& config);

}  // namespace ibsc
