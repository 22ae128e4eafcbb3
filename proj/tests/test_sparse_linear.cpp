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
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include "ibsc/errors.hpp"
#include "ibsc/sparse_linear.hpp"

using namespace ibsc;

namespace {

// Penalized objective computed independently of the solver:
//   (1/n) sum max(0, 1 - s_i (w.x_i + b))^2 + l1 ||w||_1 + l2 ||w||^2.
double objective(const Matrix& X, const std::vector<int>& y, const std::vector<double>& w,
                 double b, double l1, double l2) {
  double loss = 0.0;
  for (std::size_t i = 0; i < X.rows(); ++i) {
    double f = b;
    for (std::size_t j = 0; j < X.cols(); ++j) f += w[j] * X(i, j);
    const double r = 1.0 - (y[i] == 1 ? 1.0 : -1.0) * f;
    if (r > 0) loss += r * r;
  }
  loss /= static_cast<double>(X.rows());
  for (double x : w) loss += l1 * std::abs(x) + l2 * x * x;
  return loss;
}

// Dense grid search with recentering zoom; the oracle for solver optimality.
// dims = p + 1 (weights then bias), 21 points per axis per level.
double grid_search_min(const std::function<double(const std::vector<double>&)>& f, int dims,
                       double half_width, int levels) {
  constexpr int kPoints = 21;
  std::vector<double> center(dims, 0.0), best_pt = center, pt(dims);
  double best = f(center);
  double width = 2.0 * half_width;
  for (int level = 0; level < levels; ++level) {
    const double spacing = width / (kPoints - 1);
    long long total = 1;
    for (int d = 0; d < dims; ++d) total *= kPoints;
    for (long long flat = 0; flat < total; ++flat) {
      long long rem = flat;
      for (int d = 0; d < dims; ++d) {
        pt[d] = center[d] - width / 2.0 + spacing * static_cast<double>(rem % kPoints);
        rem /= kPoints;
      }
      const double v = f(pt);
      if (v < best) {
        best = v;
        best_pt = pt;
      }
    }
    center = best_pt;
    width *= 0.4;
  }
  return best;
}

Matrix random_matrix(std::mt19937_64& rng, std::size_t n, std::size_t p, double lo, double hi) {
  std::uniform_real_distribution<double> unif(lo, hi);
  Matrix X(n, p);
  for (double& v : X.data()) v = unif(rng);
  return X;
}

std::vector<int> random_labels(std::mt19937_64& rng, std::size_t n) {
  std::vector<int> y(n);
  do {
    for (auto& v : y) v = static_cast<int>(rng() % 2);
  } while (std::count(y.begin(), y.end(), 1) == 0 ||
           std::count(y.begin(), y.end(), 0) == 0);
  return y;
}

}  // namespace

TEST_CASE("solver objective matches dense grid search on 20 random problems") {
  std::mt19937_64 rng(101);
  const double lambdas[] = {0.02, 0.05, 0.2};
  const double l2s[] = {0.0, 0.01};
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t p = 1 + trial % 2;
    const std::size_t n = 12 + rng() % 29;  // <= 40
    const Matrix X = random_matrix(rng, n, p, -2.0, 2.0);
    const std::vector<int> y = random_labels(rng, n);
    TrainOptions opts;
    opts.l1 = lambdas[trial % 3];
    opts.l2 = l2s[trial % 2];
    opts.standardize = false;
    opts.max_iter = 20000;
    TrainInfo info;
    const SparseLinearModel model = train_linear_svm(X, y, opts, &info);
    CHECK(info.converged);
    CHECK(info.max_violation <= opts.tol);

    const double solver_obj = objective(X, y, model.weights, model.bias, opts.l1, opts.l2);
    auto f = [&](const std::vector<double>& pt) {
      const std::vector<double> w(pt.begin(), pt.end() - 1);
      return objective(X, y, w, pt.back(), opts.l1, opts.l2);
    };
    const double grid_obj = grid_search_min(f, static_cast<int>(p) + 1, 10.0, 12);
    CHECK(std::abs(solver_obj - grid_obj) <= 1e-4 * (1.0 + std::abs(grid_obj)));

    // The solution must sit well inside the grid's initial box.
    for (double w : model.weights) CHECK(std::abs(w) < 5.0);
    CHECK(std::abs(model.bias) < 5.0);
  }
}

TEST_CASE("1-D separable data gives a positive weight, verified against the grid") {
  const Matrix X = Matrix::from_rows({{-1.0}, {1.0}});
  const std::vector<int> y{0, 1};
  TrainInfo info;
  const SparseLinearModel model =
      train_l1_linear(X, y, 0.01, 1e-8, 20000, 0, /*standardize=*/false, &info);
  CHECK(model.weights[0] > 0.0);
  CHECK(info.converged);

  auto f = [&](const std::vector<double>& pt) {
    return objective(X, y, {pt[0]}, pt[1], 0.01, 0.0);
  };
  const double grid_obj = grid_search_min(f, 2, 10.0, 12);
  const double solver_obj = objective(X, y, model.weights, model.bias, 0.01, 0.0);
  CHECK(std::abs(solver_obj - grid_obj) <= 1e-4 * (1.0 + std::abs(grid_obj)));
}

TEST_CASE("huge l1 penalty zeroes every weight and fits the class prior") {
  std::mt19937_64 rng(7);
  const Matrix X = random_matrix(rng, 24, 2, -1.0, 1.0);
  std::vector<int> y(24, 0);
  for (int i = 0; i < 18; ++i) y[i] = 1;  // prior 0.75 vs 0.25
  const SparseLinearModel model = train_l1_linear(X, y, 1e6);
  CHECK(model.nonzero_count == 0);
  for (double w : model.weights) CHECK(w == 0.0);
  // With all weights zero the optimal bias is pi_plus - pi_minus.
  CHECK(model.bias == doctest::Approx(0.5).epsilon(1e-4));
}

TEST_CASE("tiny l1 penalty keeps at least one weight on separable data") {
  const Matrix X = Matrix::from_rows({{-1.0}, {-0.5}, {0.5}, {1.0}});
  const std::vector<int> y{0, 0, 1, 1};
  const SparseLinearModel model = train_l1_linear(X, y, 1e-9, 1e-6, 1000, 0, false);
  CHECK(model.nonzero_count >= 1);
}

TEST_CASE("objective history is non-increasing and ends converged") {
  std::mt19937_64 rng(55);
  for (int trial = 0; trial < 8; ++trial) {
    const Matrix X = random_matrix(rng, 30, 2, -2.0, 2.0);
    const std::vector<int> y = random_labels(rng, 30);
    TrainOptions opts;
    opts.l1 = 0.05;
    opts.max_iter = 20000;
    TrainInfo info;
    train_linear_svm(X, y, opts, &info);
    REQUIRE(info.objective.size() >= 2);
    for (std::size_t k = 1; k < info.objective.size(); ++k) {
      CHECK(info.objective[k] <= info.objective[k - 1] + 1e-9 * (1.0 + std::abs(info.objective[k - 1])));
    }
    CHECK(info.converged);
    CHECK(info.max_violation <= opts.tol);
  }
}

TEST_CASE("identical and sign-flipped columns receive symmetric weights bitwise") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  Matrix X(20, 2);
  for (std::size_t i = 0; i < 20; ++i) {
    X(i, 0) = unif(rng);
    X(i, 1) = X(i, 0);
  }
  const std::vector<int> y = random_labels(rng, 20);
  const SparseLinearModel dup = train_l1_linear(X, y, 0.05);
  CHECK(dup.weights[0] == dup.weights[1]);

  Matrix Xn = X;
  for (std::size_t i = 0; i < 20; ++i) Xn(i, 1) = -Xn(i, 0);
  const SparseLinearModel neg = train_l1_linear(Xn, y, 0.05);
  CHECK(neg.weights[0] == -neg.weights[1]);
}

TEST_CASE("nonzero mask uses a relative floor") {
  const std::vector<double> w{1.0, 1e-7, 0.0, -0.5, -1e-7};
  const auto mask = nonzero_weight_mask(w);
  CHECK(mask == std::vector<bool>{true, false, false, true, false});
  CHECK(nonzero_weight_mask(std::vector<double>{0.0, 0.0}) ==
        std::vector<bool>{false, false});
}

TEST_CASE("standardized training is invariant to dyadic column scaling") {
  std::mt19937_64 rng(21);
  Matrix X = random_matrix(rng, 25, 2, -1.0, 1.0);
  const std::vector<int> y = random_labels(rng, 25);
  const SparseLinearModel base = train_l1_linear(X, y, 0.05);

  Matrix Xs = X;
  for (std::size_t i = 0; i < Xs.rows(); ++i) Xs(i, 1) *= 1024.0;
  const SparseLinearModel scaled = train_l1_linear(Xs, y, 0.05);
  // Power-of-two scaling keeps the z-scored matrix bit-identical.
  CHECK(base.weights == scaled.weights);
  CHECK(base.bias == scaled.bias);
  for (std::size_t i = 0; i < X.rows(); ++i) {
    CHECK(decision_value(base, X.row(i)) == decision_value(scaled, Xs.row(i)));
  }
}

TEST_CASE("constant columns stay at weight zero under standardization") {
  std::mt19937_64 rng(23);
  Matrix X = random_matrix(rng, 20, 2, -1.0, 1.0);
  for (std::size_t i = 0; i < X.rows(); ++i) X(i, 1) = 3.5;
  const std::vector<int> y = random_labels(rng, 20);
  const SparseLinearModel model = train_l1_linear(X, y, 0.05);
  CHECK(model.weights[1] == 0.0);
  CHECK(model.feature_scale[1] == 0.0);
}

TEST_CASE("training is deterministic") {
  std::mt19937_64 rng(31);
  const Matrix X = random_matrix(rng, 30, 2, -2.0, 2.0);
  const std::vector<int> y = random_labels(rng, 30);
  const SparseLinearModel a = train_l1_linear(X, y, 0.05, 1e-6, 1000, 7);
  const SparseLinearModel b = train_l1_linear(X, y, 0.05, 1e-6, 1000, 7);
  CHECK(a.weights == b.weights);
  CHECK(a.bias == b.bias);
}

TEST_CASE("training input validation") {
  const Matrix X = Matrix::from_rows({{1.0}, {2.0}});
  CHECK_THROWS_AS(train_l1_linear(X, {1, 1}, 0.05), DegeneracyError);
  CHECK_THROWS_AS(train_l1_linear(X, {0, 0}, 0.05), DegeneracyError);
  CHECK_THROWS_AS(train_l1_linear(X, {0, 2}, 0.05), ValidationError);
  CHECK_THROWS_AS(train_l1_linear(X, {0}, 0.05), ValidationError);
  CHECK_THROWS_AS(train_l1_linear(X, {0, 1}, 0.0), ValidationError);
  CHECK_THROWS_AS(train_l1_linear(X, {0, 1}, -1.0), ValidationError);

  Matrix bad = X;
  bad(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(train_l1_linear(bad, {0, 1}, 0.05), NumericError);

  TrainOptions opts;
  opts.l1 = 0.0;
  opts.l2 = 0.0;
  CHECK_THROWS_AS(train_linear_svm(X, {0, 1}, opts), ValidationError);
}

TEST_CASE("decision value arithmetic and dimension checks") {
  SparseLinearModel model;
  model.weights = {0.0, 0.0};
  model.bias = 0.3;
  CHECK(decision_value(model, std::vector<double>{5.0, -7.0}) == 0.3);

  model.weights = {1.0, -1.0};
  model.bias = 0.0;
  CHECK(decision_value(model, std::vector<double>{2.0, 2.0}) == 0.0);

  CHECK_THROWS_AS(decision_value(model, std::vector<double>{1.0}), ValidationError);
}

TEST_CASE("calibration is symmetric on balanced symmetric margins") {
  SparseLinearModel model;
  model.weights = {1.0};
  model.bias = 0.0;
  const Matrix X = Matrix::from_rows({{-1.0}, {1.0}});
  const CalibratedModel cal = calibrate_probability(model, X, {0, 1});
  CHECK(calibrated_probability_at(cal, 0.0) == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(cal.slope != 0.0);
  CHECK(cal.slope < 0.0);  // larger margin, larger probability of label 1

  // Asymptotes and monotonicity.
  CHECK(calibrated_probability_at(cal, 1000.0) > 0.999);
  CHECK(calibrated_probability_at(cal, -1000.0) < 0.001);
  CHECK(calibrated_probability_at(cal, 0.1) < calibrated_probability_at(cal, 0.5));
}

TEST_CASE("zero-weight calibration approximates the class prior") {
  SparseLinearModel model;
  model.weights = {0.0};
  model.bias = 0.0;
  Matrix X(40, 1);
  std::vector<int> y(40, 0);
  for (int i = 0; i < 30; ++i) y[i] = 1;
  const CalibratedModel cal = calibrate_probability(model, X, y);
  CHECK(cal.slope != 0.0);
  const double p1 = predict_attribute_probability(cal, std::vector<double>{0.0}, 1);
  CHECK(p1 == doctest::Approx(0.75).epsilon(0.02));
}

TEST_CASE("attribute probabilities complement exactly") {
  std::mt19937_64 rng(77);
  const Matrix X = random_matrix(rng, 20, 2, -1.0, 1.0);
  const std::vector<int> y = random_labels(rng, 20);
  const SparseLinearModel model = train_l1_linear(X, y, 0.05);
  const CalibratedModel cal = calibrate_probability(model, X, y);
  for (std::size_t i = 0; i < X.rows(); ++i) {
    const double p1 = predict_attribute_probability(cal, X.row(i), 1);
    const double p0 = predict_attribute_probability(cal, X.row(i), 0);
    CHECK(p0 + p1 == 1.0);
    CHECK(p1 >= 0.0);
    CHECK(p1 <= 1.0);
  }
  CHECK_THROWS_AS(predict_attribute_probability(cal, std::vector<double>{1.0}, 1),
                  ValidationError);
  CHECK_THROWS_AS(predict_attribute_probability(cal, X.row(0), 2), ValidationError);
}

TEST_CASE("calibration rejects single-valued labels") {
  SparseLinearModel model;
  model.weights = {1.0};
  model.bias = 0.0;
  const Matrix X = Matrix::from_rows({{-1.0}, {1.0}});
  CHECK_THROWS_AS(calibrate_probability(model, X, {1, 1}), DegeneracyError);
  CHECK_THROWS_AS(calibrate_probability(model, X, {0, 0}), DegeneracyError);
}
