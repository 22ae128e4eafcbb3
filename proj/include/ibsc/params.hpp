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

#include <string>

namespace ibsc {

enum class ClassifierKind { nearest_centroid, linear_ovr };

std::string to_string(ClassifierKind kind);
ClassifierKind classifier_from_string(const std::string& name);

// Knobs shared by the construction/screening/evaluation path.
struct RunParams {
  double lambda = 0.05;      // sparse penalty for the relation predictors
  int k = 5;                 // source classes per unseen class
  bool auto_k = false;       // grow k in [2, k_max] until hamming 0
  int k_max = 8;
  int shortlist = 10;        // donor candidates kept by environment distance
  double keep_fraction = 0.5;
  ClassifierKind classifier = ClassifierKind::linear_ovr;
  double ovr_lambda = 0.01;  // l2 penalty of the one-vs-rest evaluator
};

}  // namespace ibsc
