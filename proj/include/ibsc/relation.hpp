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
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ibsc/dataset.hpp"
#include "ibsc/sparse_linear.hpp"

namespace ibsc {

// Binary attribute-to-feature relevance map.  Row a lists the feature dims
// whose sparse attribute predictor kept a nonzero weight; a row is degenerate
// (and all-zero) when the attribute is single-valued across seen samples.
struct RelationMatrix {
  Matrix R;  // d x p with entries in {0, 1}
  std::set<int> degenerate_rows;

  std::size_t num_attributes() const { return R.rows(); }
  std::size_t feature_dim() const { return R.cols(); }
};

// Per-attribute calibrated predictors; absent for degenerate attributes.
struct AttributeModels {
  std::vector<std::optional<CalibratedModel>> models;
};

struct RelationBuild {
  RelationMatrix relation;
  AttributeModels models;
};

// Binary labels of one attribute over the seen samples, in row order
// (paired with seen_sample_indices).
std::vector<int> attribute_labels(const Dataset& ds, const AttributeTable& attrs,
                                  const SplitSpec& split, int attr_index);

// Trains one sparse predictor per attribute on the seen samples (attribute
// seeds are seed + attr_index so the result is thread-count independent) and
// keeps both the relevance rows and the calibrated models.
RelationBuild build_relation_and_models(const Dataset& ds, const AttributeTable& attrs,
                                        const SplitSpec& split, double lambda, std::uint64_t seed,
                                        int threads = 0);

RelationMatrix build_relation_matrix(const Dataset& ds, const AttributeTable& attrs,
                                     const SplitSpec& split, double lambda, std::uint64_t seed,
                                     int threads = 0);

// Feature dims no attribute claims: the all-zero columns of R.
std::set<int> environment_dims(const RelationMatrix& rel);

// R goes into the binary matrix container; degenerate rows into a text file
// with one index per line.
void save_relation(const RelationMatrix& rel, const std::string& matrix_path,
                   const std::string& degenerate_path);
RelationMatrix load_relation(const std::string& matrix_path, const std::string& degenerate_path);

// JSON round-trip of the calibrated models at full double precision.
void save_attribute_models(const AttributeModels& models, const std::string& path);
AttributeModels load_attribute_models(const std::string& path);

}  // namespace ibsc
