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
#include <span>
#include <vector>

#include "ibsc/matrix.hpp"

namespace ibsc {

// Penalized squared-hinge objective over labels y in {0,1} mapped to {-1,+1}:
//
//   (1/n) sum_i max(0, 1 - y_i (w.x_i + b))^2  +  l1 ||w||_1  +  l2 ||w||^2
//
// The bias is never penalized.  Minimized by proximal gradient descent with a
// spectral step size and a backtracking guard, so the objective history is
// non-increasing and identically scaled columns receive identical weights.
struct TrainOptions {
  double l1 = 0.05;
  double l2 = 0.0;
  double tol = 1e-6;
  int max_iter = 1000;
  std::uint64_t seed = 0;     // reserved; the solver path is deterministic
  bool standardize = true;    // z-score columns, constant columns pinned at 0
};

struct TrainInfo {
  std::vector<double> objective;  // penalized objective per iteration, non-increasing
  int iterations = 0;             // proximal steps taken
  bool converged = false;
  double max_violation = 0.0;     // optimality violation at the returned point
};

struct SparseLinearModel {
  std::vector<double> weights;
  double bias = 0.0;
  double lambda = 0.0;  // governing penalty strength (l1 when present, else l2)
  int nonzero_count = 0;

  bool standardized = false;
  std::vector<double> feature_mean;   // empty unless standardized
  std::vector<double> feature_scale;  // 1/std per column; 0 for constant columns

  std::size_t dim() const { return weights.size(); }
};

// A weight counts as nonzero iff |w_j| > 1e-6 * max_j' |w_j'| (and > 0).
std::vector<bool> nonzero_weight_mask(std::span<const double> weights);

SparseLinearModel train_linear_svm(const Matrix& X, const std::vector<int>& y,
                                   const TrainOptions& opts, TrainInfo* info = nullptr);

// L1-only entry point with the pipeline defaults; lambda must be positive.
SparseLinearModel train_l1_linear(const Matrix& X, const std::vector<int>& y, double lambda,
                                  double tol = 1e-6, int max_iter = 1000, std::uint64_t seed = 0,
                                  bool standardize = true, TrainInfo* info = nullptr);

// Raw margin w.x + b, applying the stored standardization if any.
double decision_value(const SparseLinearModel& model, std::span<const double> x);

// Sigmoid map fitted on decision values with regularized targets, after the
// method of Platt as stabilized by Lin, Lin and Weng:
//   P(label=1 | x) = 1 / (1 + exp(slope * f(x) + intercept))
// The slope is always nonzero (a degenerate flat fit is nudged to -1e-12 and
// the intercept re-centered so probabilities are unchanged at the mean).
struct CalibratedModel {
  SparseLinearModel base;
  double slope = 0.0;
  double intercept = 0.0;
};

CalibratedModel calibrate_probability(const SparseLinearModel& model, const Matrix& X,
                                      const std::vector<int>& y);

// P(attribute == target_value | x); the two targets sum to exactly 1.
double predict_attribute_probability(const CalibratedModel& model, std::span<const double> x,
                                     int target_value);

// Probability of label 1 at a given decision value (exposed for tests).
double calibrated_probability_at(const CalibratedModel& model, double decision);

}  // namespace ibsc
