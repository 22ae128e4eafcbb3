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
#include <string>
#include <vector>

#include <json.hpp>

#include "ibsc/construction.hpp"
#include "ibsc/dataset.hpp"
#include "ibsc/params.hpp"

namespace ibsc {

// Classifier over the unseen classes, trained purely on constructed samples.
struct UnseenClassifier {
  ClassifierKind kind = ClassifierKind::nearest_centroid;
  std::vector<int> classes;  // ascending

  // nearest_centroid state
  std::vector<std::vector<double>> centroids;  // aligned with classes

  // linear_ovr state: one l2 squared-hinge model per class
  std::vector<SparseLinearModel> models;

  int predict(std::span<const double> x) const;  // ties keep the smaller id
};

// expected_classes, when nonempty, must all appear among the labels.
UnseenClassifier train_unseen_classifier(const Matrix& X, const std::vector<int>& labels,
                                         ClassifierKind kind, double ovr_lambda = 0.01,
                                         const std::vector<int>& expected_classes = {});

double top1_accuracy(const UnseenClassifier& clf, const Matrix& X,
                     const std::vector<int>& labels);

// Reference strategies sharing the splice geometry with the constructed set:
//   M1: the primary source's samples relabeled as u, untouched.
//   M2: as M1, but r randomly chosen dims overwritten with uniform noise,
//       r = |replaced_dims(u)|.
//   M3: as M1, but exactly the dims construction would replace overwritten
//       with uniform noise.
// Noise is uniform within the per-dim min/max of the seen samples.
enum class BaselineMode { M1, M2, M3 };

std::vector<ConstructedSample> baseline_construct(const Dataset& ds, const AttributeTable& attrs,
                                                  const RelationMatrix& rel,
                                                  const SourcePlan& plan, BaselineMode mode,
                                                  std::uint64_t seed);

struct StrategyResult {
  double top1 = 0.0;
  std::map<int, double> per_class;
  std::size_t train_samples = 0;
};

struct EvalReport {
  std::vector<std::pair<std::string, StrategyResult>> strategies;  // fixed order
  RunParams params;
  std::uint64_t seed = 0;

  nlohmann::ordered_json to_json() const;
};

// Trains the configured classifier on one strategy's constructed samples and
// scores it on the real unseen-class samples.
StrategyResult evaluate_constructed(const std::vector<ConstructedSample>& train,
                                    const std::vector<int>& unseen_classes, const Matrix& test_X,
                                    const std::vector<int>& test_y, const RunParams& params);

void save_eval_report(const EvalReport& report, const std::string& path);

// Full in-memory comparison on one dataset: builds the relation, constructs
// and screens samples, materializes the baselines, then trains and scores one
// classifier per strategy on the real unseen-class samples.
EvalReport compare_strategies(const Dataset& ds, const AttributeTable& attrs,
                              const SplitSpec& split, const RunParams& params, std::uint64_t seed,
                              int threads = 0);

}  // namespace ibsc
