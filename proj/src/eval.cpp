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

#include "ibsc/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <set>

#include "ibsc/errors.hpp"
#include "ibsc/parallel.hpp"
#include "ibsc/screening.hpp"

namespace ibsc {

std::string to_string(ClassifierKind kind) {
  return kind == ClassifierKind::nearest_centroid ? "nearest_centroid" : "linear_ovr";
}

ClassifierKind classifier_from_string(const std::string& name) {
  if (name == "nearest_centroid") return ClassifierKind::nearest_centroid;
  if (name == "linear_ovr") return ClassifierKind::linear_ovr;
  throw ValidationError("unknown classifier '" + name +
                        "' (expected nearest_centroid or linear_ovr)");
}

int UnseenClassifier::predict(std::span<const double> x) const {
  if (classes.empty()) throw ValidationError("classifier has no classes");
  if (classes.size() == 1) return classes.front();
  int best = classes.front();
  if (kind == ClassifierKind::nearest_centroid) {
    double best_d = squared_l2_distance(x, centroids.front());
    for (std::size_t i = 1; i < classes.size(); ++i) {
      const double d = squared_l2_distance(x, centroids[i]);
      if (d < best_d) {
        best_d = d;
        best = classes[i];
      }
    }
  } else {
    double best_f = decision_value(models.front(), x);
    for (std::size_t i = 1; i < classes.size(); ++i) {
      const double f = decision_value(models[i], x);
      if (f > best_f) {
        best_f = f;
        best = classes[i];
      }
    }
  }
  return best;
}

UnseenClassifier train_unseen_classifier(const Matrix& X, const std::vector<int>& labels,
                                         ClassifierKind kind, double ovr_lambda,
                                         const std::vector<int>& expected_classes) {
  if (X.rows() == 0) throw ValidationError("classifier training set is empty");
  if (labels.size() != X.rows()) throw ValidationError("training label count mismatch");

  std::set<int> present(labels.begin(), labels.end());
  for (int c : expected_classes) {
    if (!present.count(c)) {
      throw DegeneracyError("class " + std::to_string(c) + " has zero training samples");
    }
  }

  UnseenClassifier clf;
  clf.kind = kind;
  clf.classes.assign(present.begin(), present.end());

  if (kind == ClassifierKind::nearest_centroid) {
    Dataset tmp;
    tmp.features = X;
    tmp.labels = labels;
    int max_label = *std::max_element(labels.begin(), labels.end());
    for (int c = 0; c <= max_label; ++c) tmp.class_names.push_back("class_" + std::to_string(c));
    const auto cents = class_centroids(tmp, present);
    for (int c : clf.classes) clf.centroids.push_back(cents.at(c));
    return clf;
  }

  if (!(ovr_lambda > 0)) throw ValidationError("ovr_lambda must be positive");
  if (clf.classes.size() == 1) return clf;  // predict() short-circuits

  TrainOptions opts;
  opts.l1 = 0.0;
  opts.l2 = ovr_lambda;
  opts.tol = 1e-6;
  opts.max_iter = 1000;
  opts.standardize = true;
  for (int c : clf.classes) {
    std::vector<int> y(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) y[i] = labels[i] == c ? 1 : 0;
    clf.models.push_back(train_linear_svm(X, y, opts));
  }
  return clf;
}

double top1_accuracy(const UnseenClassifier& clf, const Matrix& X,
                     const std::vector<int>& labels) {
  if (X.rows() == 0) throw ValidationError("evaluation set is empty");
  if (labels.size() != X.rows()) throw ValidationError("evaluation label count mismatch");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < X.rows(); ++i) {
    if (clf.predict(X.row(i)) == labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(X.rows());
}

namespace {

struct DimRanges {
  std::vector<double> lo, hi;
};

DimRanges seen_feature_ranges(const Dataset& ds, const SplitSpec& split) {
  DimRanges r;
  r.lo.assign(ds.p(), std::numeric_limits<double>::infinity());
  r.hi.assign(ds.p(), -std::numeric_limits<double>::infinity());
  bool any = false;
  for (std::size_t i = 0; i < ds.n(); ++i) {
    if (!split.is_seen(ds.labels[i])) continue;
    any = true;
    const auto row = ds.features.row(i);
    for (std::size_t j = 0; j < ds.p(); ++j) {
      r.lo[j] = std::min(r.lo[j], row[j]);
      r.hi[j] = std::max(r.hi[j], row[j]);
    }
  }
  if (!any) throw DegeneracyError("no samples belong to seen classes");
  return r;
}

std::vector<std::size_t> samples_of_class(const Dataset& ds, int c) {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < ds.n(); ++i) {
    if (ds.labels[i] == c) rows.push_back(i);
  }
  return rows;
}

}  // namespace

std::vector<ConstructedSample> baseline_construct(const Dataset& ds, const AttributeTable& attrs,
                                                  const RelationMatrix& rel,
                                                  const SourcePlan& plan, BaselineMode mode,
                                                  std::uint64_t seed) {
  const DimRanges ranges =
      mode == BaselineMode::M1 ? DimRanges{} : [&] {
        SplitSpec split;
        for (const auto& e : plan.entries) split.unseen.insert(e.unseen);
        for (const auto& e : plan.entries) {
          for (int s : e.ranked_seen) split.seen.insert(s);
        }
        return seen_feature_ranges(ds, split);
      }();

  std::mt19937_64 rng(seed);
  std::vector<ConstructedSample> out;
  for (const auto& entry : plan.entries) {
    const int s1 = entry.sources.front();
    const std::vector<std::size_t> base_rows = samples_of_class(ds, s1);
    if (base_rows.empty()) {
      throw DegeneracyError("primary source class " + std::to_string(s1) + " has no samples");
    }
    const std::set<int> dims = mode == BaselineMode::M1
                                   ? std::set<int>{}
                                   : replaced_dims(ds, attrs, rel, entry);
    const std::size_t r = dims.size();

    for (std::size_t b : base_rows) {
      ConstructedSample s;
      const auto base = ds.features.row(b);
      s.feature.assign(base.begin(), base.end());
      s.target_class = entry.unseen;
      s.base_sample = b;
      s.provenance.assign(ds.p(), kRetained);

      std::vector<std::size_t> chosen;
      if (mode == BaselineMode::M2 && r > 0) {
        std::vector<std::size_t> all(ds.p());
        for (std::size_t j = 0; j < ds.p(); ++j) all[j] = j;
        std::shuffle(all.begin(), all.end(), rng);
        chosen.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(r));
        std::sort(chosen.begin(), chosen.end());
      } else if (mode == BaselineMode::M3) {
        chosen.assign(dims.begin(), dims.end());
      }
      for (std::size_t j : chosen) {
        const double lo = ranges.lo[j], hi = ranges.hi[j];
        double v = lo;
        if (hi > lo) {
          std::uniform_real_distribution<double> dist(lo, hi);
          v = dist(rng);
        }
        s.feature[j] = v;
        s.provenance[j] = kRandomized;
      }
      out.push_back(std::move(s));
    }
  }
  return out;
}

nlohmann::ordered_json EvalReport::to_json() const {
  nlohmann::ordered_json j;
  nlohmann::ordered_json strat;
  for (const auto& [name, result] : strategies) {
    nlohmann::ordered_json r;
    r["top1"] = result.top1;
    nlohmann::ordered_json pc;
    for (const auto& [c, acc] : result.per_class) pc[std::to_string(c)] = acc;
    r["per_class"] = std::move(pc);
    r["train_samples"] = result.train_samples;
    strat[name] = std::move(r);
  }
  j["strategies"] = std::move(strat);
  nlohmann::ordered_json cfg;
  cfg["lambda"] = params.lambda;
  cfg["k"] = params.k;
  cfg["auto_k"] = params.auto_k;
  cfg["k_max"] = params.k_max;
  cfg["shortlist"] = params.shortlist;
  cfg["keep_fraction"] = params.keep_fraction;
  cfg["classifier"] = to_string(params.classifier);
  cfg["ovr_lambda"] = params.ovr_lambda;
  j["config"] = std::move(cfg);
  j["seed"] = seed;
  return j;
}

void save_eval_report(const EvalReport& report, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ValidationError("cannot open " + path + " for writing");
  out << report.to_json().dump(2) << "\n";
  if (!out) throw ValidationError("write failed for " + path);
}

StrategyResult evaluate_constructed(const std::vector<ConstructedSample>& train,
                                    const std::vector<int>& unseen_classes, const Matrix& test_X,
                                    const std::vector<int>& test_y, const RunParams& params) {
  if (train.empty()) throw ValidationError("strategy produced no training samples");
  Matrix X(train.size(), train.front().feature.size());
  std::vector<int> y(train.size());
  for (std::size_t i = 0; i < train.size(); ++i) {
    std::copy(train[i].feature.begin(), train[i].feature.end(), X.row(i).begin());
    y[i] = train[i].target_class;
  }
  const UnseenClassifier clf =
      train_unseen_classifier(X, y, params.classifier, params.ovr_lambda, unseen_classes);

  StrategyResult result;
  result.train_samples = train.size();
  result.top1 = top1_accuracy(clf, test_X, test_y);
  std::map<int, std::size_t> total, correct;
  for (int c : unseen_classes) {
    total[c] = 0;
    correct[c] = 0;
  }
  for (std::size_t i = 0; i < test_X.rows(); ++i) {
    ++total[test_y[i]];
    if (clf.predict(test_X.row(i)) == test_y[i]) ++correct[test_y[i]];
  }
  for (int c : unseen_classes) {
    result.per_class[c] =
        total[c] == 0 ? 0.0 : static_cast<double>(correct[c]) / static_cast<double>(total[c]);
  }
  return result;
}

EvalReport compare_strategies(const Dataset& ds, const AttributeTable& attrs,
                              const SplitSpec& split, const RunParams& params, std::uint64_t seed,
                              int threads) {
  validate_inputs(ds, attrs, split);

  // Real unseen samples are the evaluation set.
  std::vector<std::size_t> test_rows;
  for (std::size_t i = 0; i < ds.n(); ++i) {
    if (split.is_unseen(ds.labels[i])) test_rows.push_back(i);
  }
  if (test_rows.empty()) {
    throw DegeneracyError("no real samples of unseen classes to evaluate on");
  }
  Matrix test_X(test_rows.size(), ds.p());
  std::vector<int> test_y(test_rows.size());
  for (std::size_t i = 0; i < test_rows.size(); ++i) {
    const auto row = ds.features.row(test_rows[i]);
    std::copy(row.begin(), row.end(), test_X.row(i).begin());
    test_y[i] = ds.labels[test_rows[i]];
  }

  const RelationBuild rb =
      build_relation_and_models(ds, attrs, split, params.lambda, seed, threads);
  const PairwiseStats stats = pairwise_stats(attrs);
  const SourcePlan plan =
      build_source_plan(attrs, stats, split, params.k, params.auto_k, params.k_max);

  const std::vector<int> unseen_classes(split.unseen.begin(), split.unseen.end());

  // Constructed (spliced) samples per unseen class, then their screened subset.
  std::vector<std::vector<ConstructedSample>> constructed(unseen_classes.size());
  parallel_for(unseen_classes.size(), threads, [&](std::size_t i) {
    const int u = unseen_classes[i];
    constructed[i] = construct_class_samples(ds, attrs, rb.relation, plan, rb.models, u,
                                             seed + static_cast<std::uint64_t>(u),
                                             params.shortlist)
                         .samples;
  });

  const auto centroids = class_centroids(ds, split.seen);
  std::vector<ConstructedSample> ibsc_train, ibsc_s_train;
  for (std::size_t i = 0; i < unseen_classes.size(); ++i) {
    const DissimilarityVector attr_profile =
        dissimilarity_attribute(attrs, split, unseen_classes[i]);
    ScreenResult screened =
        screen_samples(constructed[i], attr_profile, centroids, params.keep_fraction);
    ibsc_train.insert(ibsc_train.end(), constructed[i].begin(), constructed[i].end());
    ibsc_s_train.insert(ibsc_s_train.end(), screened.kept.begin(), screened.kept.end());
  }

  // Baseline streams are seeded per strategy so thread counts cannot matter.
  const std::vector<std::pair<std::string, BaselineMode>> baseline_specs = {
      {"M1", BaselineMode::M1}, {"M2", BaselineMode::M2}, {"M3", BaselineMode::M3}};
  std::vector<std::vector<ConstructedSample>> baselines(baseline_specs.size());
  parallel_for(baseline_specs.size(), threads, [&](std::size_t i) {
    baselines[i] = baseline_construct(ds, attrs, rb.relation, plan, baseline_specs[i].second,
                                      seed + static_cast<std::uint64_t>(i));
  });

  std::vector<std::pair<std::string, const std::vector<ConstructedSample>*>> jobs;
  for (std::size_t i = 0; i < baseline_specs.size(); ++i) {
    jobs.emplace_back(baseline_specs[i].first, &baselines[i]);
  }
  jobs.emplace_back("IBSC", &ibsc_train);
  jobs.emplace_back("IBSC_S", &ibsc_s_train);

  std::vector<StrategyResult> results(jobs.size());
  parallel_for(jobs.size(), threads, [&](std::size_t i) {
    results[i] = evaluate_constructed(*jobs[i].second, unseen_classes, test_X, test_y, params);
  });

  EvalReport report;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    report.strategies.emplace_back(jobs[i].first, results[i]);
  }
  report.params = params;
  report.seed = seed;
  return report;
}

}  // namespace ibsc
