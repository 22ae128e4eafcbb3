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
#include <map>
#include <set>
#include <string>
#include <vector>

#include "ibsc/matrix.hpp"

namespace ibsc {

enum class FileFormat { csv, binary };

// Labeled feature vectors.  Class ids are dense integers starting at 0.
struct Dataset {
  Matrix features;                       // n x p
  std::vector<int> labels;               // one class id per row
  std::vector<std::string> class_names;  // index = class id

  std::size_t n() const { return features.rows(); }
  std::size_t p() const { return features.cols(); }
  std::size_t num_classes() const { return class_names.size(); }

  void validate() const;  // throws ValidationError
};

// Per-class attribute vectors, row index = class id.  The continuous matrix
// drives similarity statistics; the binary matrix drives splicing decisions.
struct AttributeTable {
  Matrix continuous;  // K x d, finite reals
  Matrix binary;      // K x d, values in {0, 1}

  std::size_t num_classes() const { return continuous.rows(); }
  std::size_t num_attributes() const { return continuous.cols(); }

  void validate() const;  // throws ValidationError
};

// Disjoint seen/unseen partition of the class ids.
struct SplitSpec {
  std::set<int> seen;
  std::set<int> unseen;

  void validate() const;  // structural checks only
  bool is_seen(int c) const { return seen.count(c) != 0; }
  bool is_unseen(int c) const { return unseen.count(c) != 0; }
};

// Feature CSV: header "id,label,f0,...,f{p-1}", one sample per row.
// Binary datasets reuse the matrix container with the same column layout.
Dataset load_dataset(const std::string& path, FileFormat format);
void save_dataset(const std::string& path, FileFormat format, const Dataset& ds);

// Low-level feature-CSV access shared with the construction artifacts, which
// carry a meaningful id column (the base sample index).
struct FeatureFile {
  std::vector<long long> ids;
  std::vector<int> labels;
  Matrix features;
};
FeatureFile load_feature_csv(const std::string& path);
void save_feature_csv(const std::string& path, const FeatureFile& file);

// Attribute CSVs: header "class,a0,...,a{d-1}", one class per row, the class
// column equal to the row index.
AttributeTable load_attribute_table(const std::string& continuous_path,
                                    const std::string& binary_path);
void save_attribute_table(const std::string& continuous_path, const std::string& binary_path,
                          const AttributeTable& attrs);

// Split file: two lines, "seen: 0,1,2" then "unseen: 3,4".
SplitSpec load_split(const std::string& path);
void save_split(const std::string& path, const SplitSpec& split);

// Cross-file consistency: labels and split ids must index the attribute
// table, and the split must cover every class that has samples.
void validate_inputs(const Dataset& ds, const AttributeTable& attrs, const SplitSpec& split);

// Mean feature vector per requested class id.  A requested class with zero
// samples raises DegeneracyError.
std::map<int, std::vector<double>> class_centroids(const Dataset& ds,
                                                   const std::set<int>& classes);

// Row indices of samples whose label is in the seen set, ascending.
std::vector<std::size_t> seen_sample_indices(const Dataset& ds, const SplitSpec& split);

// Shortest decimal form that round-trips a double exactly.
std::string format_double(double v);

}  // namespace ibsc
