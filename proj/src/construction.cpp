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

#include "ibsc/construction.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <tuple>

#include "ibsc/errors.hpp"

namespace ibsc {

PairwiseStats pairwise_stats(const AttributeTable& attrs) {
  attrs.validate();
  const std::size_t K = attrs.num_classes();
  if (K < 2) throw DegeneracyError("pairwise statistics need at least 2 classes");

  std::vector<double> d2, d1;
  d2.reserve(K * (K - 1) / 2);
  d1.reserve(K * (K - 1) / 2);
  for (std::size_t i = 0; i < K; ++i) {
    for (std::size_t j = i + 1; j < K; ++j) {
      d2.push_back(l2_distance(attrs.continuous.row(i), attrs.continuous.row(j)));
      d1.push_back(l1_distance(attrs.continuous.row(i), attrs.continuous.row(j)));
    }
  }

  auto mean_std = [](const std::vector<double>& v) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    var /= static_cast<double>(v.size());  // population variance
    return std::pair<double, double>(mean, std::sqrt(var));
  };

  PairwiseStats stats;
  std::tie(stats.mu1, stats.sigma1) = mean_std(d2);
  std::tie(stats.mu2, stats.sigma2) = mean_std(d1);
  if (stats.sigma1 == 0.0 || stats.sigma2 == 0.0) {
    throw DegeneracyError("pairwise attribute distances have zero spread");
  }
  return stats;
}

namespace {

void check_class_index(const AttributeTable& attrs, int c) {
  if (c < 0 || c >= static_cast<int>(attrs.num_classes())) {
    throw ValidationError("class id " + std::to_string(c) + " out of range [0, " +
                          std::to_string(attrs.num_classes()) + ")");
  }
}

}  // namespace

double class_similarity(const AttributeTable& attrs, const PairwiseStats& stats, int i, int j) {
  check_class_index(attrs, i);
  check_class_index(attrs, j);
  if (i == j) throw ValidationError("class similarity is undefined for a self pair");
  const double d = l2_distance(attrs.continuous.row(i), attrs.continuous.row(j));
  return (d - stats.mu1) / stats.sigma1;
}

double attribute_difference(const AttributeTable& attrs, const PairwiseStats& stats, int i,
                            int j) {
  check_class_index(attrs, i);
  check_class_index(attrs, j);
  if (i == j) throw ValidationError("attribute difference is undefined for a self pair");
  const double d = l1_distance(attrs.continuous.row(i), attrs.continuous.row(j));
  return (d - stats.mu2) / stats.sigma2;
}

std::vector<int> rank_source_candidates(const AttributeTable& attrs, const PairwiseStats& stats,
                                        const SplitSpec& split, int u) {
  check_class_index(attrs, u);
  std::vector<std::pair<double, int>> order;
  order.reserve(split.seen.size());
  for (int s : split.seen) {
    check_class_index(attrs, s);
    order.emplace_back(class_similarity(attrs, stats, u, s), s);
  }
  std::sort(order.begin(), order.end());
  std::vector<int> ranked;
  ranked.reserve(order.size());
  for (const auto& [phi, s] : order) ranked.push_back(s);
  return ranked;
}

int virtual_attribute_hamming(const AttributeTable& attrs, const std::vector<int>& sources,
                              int u) {
  check_class_index(attrs, u);
  if (sources.empty()) throw ValidationError("source list must be nonempty");
  for (int s : sources) check_class_index(attrs, s);
  int hamming = 0;
  for (std::size_t a = 0; a < attrs.num_attributes(); ++a) {
    const double want = attrs.binary(u, a);
    bool covered = false;
    for (int s : sources) {
      if (attrs.binary(s, a) == want) {
        covered = true;
        break;
      }
    }
    if (!covered) ++hamming;
  }
  return hamming;
}

AssignmentResult solve_linear_assignment(const Matrix& cost) {
  const std::size_t n = cost.rows(), m = cost.cols();
  if (n == 0 || m == 0) throw ValidationError("assignment cost matrix must be nonempty");
  if (n > m) {
    throw DegeneracyError("assignment infeasible: " + std::to_string(n) + " rows but only " +
                          std::to_string(m) + " columns");
  }
  for (double v : cost.data()) {
    if (!std::isfinite(v)) throw NumericError("non-finite assignment cost");
  }

  // Shortest augmenting paths over dual potentials (1-based, col 0 virtual).
  const double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<int> match(m + 1, 0), way(m + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    match[0] = static_cast<int>(i);
    std::size_t j0 = 0;
    std::vector<double> minv(m + 1, kInf);
    std::vector<char> used(m + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = static_cast<std::size_t>(match[j0]);
      double delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = static_cast<int>(j0);
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= m; ++j) {
        if (used[j]) {
          u[static_cast<std::size_t>(match[j])] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const std::size_t j1 = static_cast<std::size_t>(way[j0]);
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  AssignmentResult result;
  result.col_of_row.assign(n, -1);
  for (std::size_t j = 1; j <= m; ++j) {
    if (match[j] > 0) result.col_of_row[static_cast<std::size_t>(match[j] - 1)] = static_cast<int>(j - 1);
  }
  for (std::size_t i = 0; i < n; ++i) {
    result.cost += cost(i, static_cast<std::size_t>(result.col_of_row[i]));
  }
  return result;
}

std::map<int, int> assign_primary_sources(const AttributeTable& attrs, const PairwiseStats& stats,
                                          const SplitSpec& split) {
  split.validate();
  const std::vector<int> unseen(split.unseen.begin(), split.unseen.end());
  const std::vector<int> seen(split.seen.begin(), split.seen.end());
  if (unseen.size() > seen.size()) {
    throw DegeneracyError("assignment infeasible: " + std::to_string(unseen.size()) +
                          " unseen classes but only " + std::to_string(seen.size()) +
                          " seen classes");
  }
  Matrix cost(unseen.size(), seen.size());
  for (std::size_t i = 0; i < unseen.size(); ++i) {
    for (std::size_t j = 0; j < seen.size(); ++j) {
      cost(i, j) = class_similarity(attrs, stats, unseen[i], seen[j]) +
                   attribute_difference(attrs, stats, unseen[i], seen[j]);
    }
  }
  const AssignmentResult result = solve_linear_assignment(cost);
  std::map<int, int> out;
  for (std::size_t i = 0; i < unseen.size(); ++i) {
    out[unseen[i]] = seen[static_cast<std::size_t>(result.col_of_row[i])];
  }
  return out;
}

const SourcePlanEntry& SourcePlan::entry_for(int u) const {
  for (const auto& e : entries) {
    if (e.unseen == u) return e;
  }
  throw ValidationError("no plan entry for class " + std::to_string(u));
}

SourcePlan build_source_plan(const AttributeTable& attrs, const PairwiseStats& stats,
                             const SplitSpec& split, int k, bool auto_k, int k_max) {
  split.validate();
  const int num_seen = static_cast<int>(split.seen.size());
  if (auto_k) {
    if (k_max < 2) throw ValidationError("k_max must be >= 2 in auto mode");
    if (k_max > num_seen) {
      throw ValidationError("k_max " + std::to_string(k_max) + " exceeds seen class count " +
                            std::to_string(num_seen));
    }
  } else {
    if (k < 1) throw ValidationError("k must be >= 1");
    if (k > num_seen) {
      throw ValidationError("k " + std::to_string(k) + " exceeds seen class count " +
                            std::to_string(num_seen));
    }
  }

  const std::map<int, int> primary = assign_primary_sources(attrs, stats, split);

  SourcePlan plan;
  for (int u : split.unseen) {
    SourcePlanEntry entry;
    entry.unseen = u;
    entry.ranked_seen = rank_source_candidates(attrs, stats, split, u);
    const int s1 = primary.at(u);
    entry.assignment_cost = class_similarity(attrs, stats, u, s1) +
                            attribute_difference(attrs, stats, u, s1);

    std::vector<int> rest;
    rest.reserve(entry.ranked_seen.size());
    for (int s : entry.ranked_seen) {
      if (s != s1) rest.push_back(s);
    }

    auto sources_for = [&](int kk) {
      std::vector<int> sources{s1};
      for (int i = 0; i + 1 < kk && i < static_cast<int>(rest.size()); ++i) {
        sources.push_back(rest[static_cast<std::size_t>(i)]);
      }
      return sources;
    };

    if (auto_k) {
      int chosen = k_max;
      for (int kk = 2; kk <= k_max; ++kk) {
        if (virtual_attribute_hamming(attrs, sources_for(kk), u) == 0) {
          chosen = kk;
          break;
        }
      }
      entry.sources = sources_for(chosen);
    } else {
      entry.sources = sources_for(k);
    }
    entry.hamming_reference = virtual_attribute_hamming(attrs, entry.sources, u);
    plan.entries.push_back(std::move(entry));
  }
  return plan;
}

namespace {

std::vector<std::size_t> samples_of_class(const Dataset& ds, int c) {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < ds.n(); ++i) {
    if (ds.labels[i] == c) rows.push_back(i);
  }
  return rows;
}

std::vector<int> env_dim_list(const RelationMatrix& rel) {
  const std::set<int> dims = environment_dims(rel);
  return {dims.begin(), dims.end()};
}

double env_distance(const Dataset& ds, const std::vector<int>& env, std::size_t a,
                    std::size_t b) {
  double acc = 0.0;
  for (int j : env) {
    const double d = ds.features(a, static_cast<std::size_t>(j)) -
                     ds.features(b, static_cast<std::size_t>(j));
    acc += d * d;
  }
  return std::sqrt(acc);
}

// Most similar class carrying the target value that actually has samples;
// first scans the planned sources (skipping S1), then widens to the full
// similarity ranking over all seen classes.
int donor_class_for(const Dataset& ds, const AttributeTable& attrs, const SourcePlanEntry& entry,
                    int attr_index, double target, int u) {
  auto qualifies = [&](int c) {
    return attrs.binary(c, attr_index) == target && !samples_of_class(ds, c).empty();
  };
  for (std::size_t i = 1; i < entry.sources.size(); ++i) {
    if (qualifies(entry.sources[i])) return entry.sources[i];
  }
  for (int c : entry.ranked_seen) {
    if (qualifies(c)) return c;
  }
  throw DegeneracyError("attribute " + std::to_string(attr_index) + " of class " +
                        std::to_string(u) + " is uncoverable: no seen sample carries value " +
                        format_double(target));
}

std::size_t select_donor_impl(const Dataset& ds, const AttributeTable& attrs,
                              const RelationMatrix& rel, const std::vector<int>& env,
                              const SourcePlanEntry& entry, const AttributeModels& models, int u,
                              std::size_t base_sample_index, int attr_index, int m) {
  if (m < 1) throw ValidationError("donor shortlist size must be >= 1");
  if (attr_index < 0 || attr_index >= static_cast<int>(attrs.num_attributes())) {
    throw ValidationError("attribute index " + std::to_string(attr_index) + " out of range");
  }
  (void)rel;
  const double target = attrs.binary(u, attr_index);
  const int donor_class = donor_class_for(ds, attrs, entry, attr_index, target, u);
  const std::vector<std::size_t> rows = samples_of_class(ds, donor_class);

  std::vector<std::pair<double, std::size_t>> by_distance;
  by_distance.reserve(rows.size());
  for (std::size_t r : rows) {
    by_distance.emplace_back(env_distance(ds, env, r, base_sample_index), r);
  }
  std::sort(by_distance.begin(), by_distance.end());
  const std::size_t shortlist =
      std::min<std::size_t>(static_cast<std::size_t>(m), by_distance.size());

  const auto& model = models.models.at(static_cast<std::size_t>(attr_index));
  if (!model.has_value()) {
    throw DegeneracyError("attribute " + std::to_string(attr_index) +
                          " has no calibrated model (degenerate over seen samples)");
  }

  std::size_t best = by_distance[0].second;
  double best_prob = -1.0;
  for (std::size_t i = 0; i < shortlist; ++i) {
    const std::size_t r = by_distance[i].second;
    const double prob = predict_attribute_probability(
        *model, ds.features.row(r), static_cast<int>(target));
    if (prob > best_prob || (prob == best_prob && r < best)) {
      best_prob = prob;
      best = r;
    }
  }
  return best;
}

}  // namespace

std::size_t select_donor_sample(const Dataset& ds, const AttributeTable& attrs,
                                const RelationMatrix& rel, const SourcePlan& plan,
                                const AttributeModels& models, int u,
                                std::size_t base_sample_index, int attr_index, int m) {
  const SourcePlanEntry& entry = plan.entry_for(u);
  if (base_sample_index >= ds.n()) {
    throw ValidationError("base sample index " + std::to_string(base_sample_index) +
                          " out of range");
  }
  if (attrs.binary(u, attr_index) == attrs.binary(entry.sources.front(), attr_index)) {
    throw ValidationError("attribute " + std::to_string(attr_index) +
                          " does not differ between class " + std::to_string(u) +
                          " and its primary source");
  }
  return select_donor_impl(ds, attrs, rel, env_dim_list(rel), entry, models, u, base_sample_index,
                           attr_index, m);
}

std::set<int> replaced_dims(const Dataset& ds, const AttributeTable& attrs,
                            const RelationMatrix& rel, const SourcePlanEntry& entry) {
  std::set<int> dims;
  const int s1 = entry.sources.front();
  for (std::size_t a = 0; a < attrs.num_attributes(); ++a) {
    const double want = attrs.binary(entry.unseen, a);
    if (want == attrs.binary(s1, a)) continue;
    bool coverable = false;
    for (int c : entry.ranked_seen) {
      if (attrs.binary(c, a) == want && !samples_of_class(ds, c).empty()) {
        coverable = true;
        break;
      }
    }
    if (!coverable) continue;
    for (std::size_t j = 0; j < rel.feature_dim(); ++j) {
      if (rel.R(a, j) != 0.0) dims.insert(static_cast<int>(j));
    }
  }
  return dims;
}

ClassConstruction construct_class_samples(const Dataset& ds, const AttributeTable& attrs,
                                          const RelationMatrix& rel, const SourcePlan& plan,
                                          const AttributeModels& models, int u, std::uint64_t seed,
                                          int m) {
  (void)seed;  // splicing is deterministic; kept for interface uniformity
  const SourcePlanEntry& entry = plan.entry_for(u);
  if (rel.num_attributes() != attrs.num_attributes() || rel.feature_dim() != ds.p()) {
    throw ValidationError("relation matrix shape does not match dataset and attribute table");
  }
  const int s1 = entry.sources.front();
  const std::vector<std::size_t> base_rows = samples_of_class(ds, s1);
  if (base_rows.empty()) {
    throw DegeneracyError("primary source class " + std::to_string(s1) + " has no samples");
  }

  // Differing attributes, split into coverable and uncoverable up front so
  // degenerate attribute models are never consulted.
  std::vector<int> splice_attrs;
  ClassConstruction out;
  for (std::size_t a = 0; a < attrs.num_attributes(); ++a) {
    const double want = attrs.binary(u, a);
    if (want == attrs.binary(s1, a)) continue;
    bool coverable = false;
    for (int c : entry.ranked_seen) {
      if (attrs.binary(c, a) == want && !samples_of_class(ds, c).empty()) {
        coverable = true;
        break;
      }
    }
    if (coverable) {
      splice_attrs.push_back(static_cast<int>(a));
    } else {
      out.skipped_attributes.insert(static_cast<int>(a));
    }
  }

  const std::vector<int> env = env_dim_list(rel);
  for (std::size_t b : base_rows) {
    ConstructedSample sample;
    const auto base = ds.features.row(b);
    sample.feature.assign(base.begin(), base.end());
    sample.target_class = u;
    sample.base_sample = b;
    sample.provenance.assign(ds.p(), kRetained);
    for (int a : splice_attrs) {
      const std::size_t donor =
          select_donor_impl(ds, attrs, rel, env, entry, models, u, b, a, m);
      for (std::size_t j = 0; j < ds.p(); ++j) {
        if (rel.R(static_cast<std::size_t>(a), j) != 0.0) {
          sample.feature[j] = ds.features(donor, j);
          sample.provenance[j] = static_cast<int>(donor);
        }
      }
    }
    out.samples.push_back(std::move(sample));
  }
  return out;
}

void save_source_plan(const SourcePlan& plan, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ValidationError("cannot open " + path + " for writing");
  std::size_t max_k = 0;
  for (const auto& e : plan.entries) max_k = std::max(max_k, e.sources.size());
  out << "unseen_id";
  for (std::size_t i = 1; i <= max_k; ++i) out << ",S" << i;
  out << ",cost,hamming\n";
  for (const auto& e : plan.entries) {
    out << e.unseen;
    for (std::size_t i = 0; i < max_k; ++i) {
      out << ',';
      if (i < e.sources.size()) out << e.sources[i];
    }
    out << ',' << format_double(e.assignment_cost) << ',' << e.hamming_reference << "\n";
  }
  if (!out) throw ValidationError("write failed for " + path);
}

void save_constructed(const std::vector<ConstructedSample>& samples, const std::string& csv_path,
                      const std::string& provenance_path) {
  if (samples.empty()) throw ValidationError("no constructed samples to write");
  FeatureFile file;
  const std::size_t p = samples.front().feature.size();
  file.features = Matrix(samples.size(), p);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].feature.size() != p) {
      throw ValidationError("constructed samples disagree on feature dimension");
    }
    file.ids.push_back(static_cast<long long>(samples[i].base_sample));
    file.labels.push_back(samples[i].target_class);
    std::copy(samples[i].feature.begin(), samples[i].feature.end(),
              file.features.row(i).begin());
  }
  save_feature_csv(csv_path, file);

  std::ofstream out(provenance_path, std::ios::trunc);
  if (!out) throw ValidationError("cannot open " + provenance_path + " for writing");
  out << "id,dim,donor_sample_index\n";
  for (const auto& s : samples) {
    for (std::size_t j = 0; j < s.provenance.size(); ++j) {
      out << s.base_sample << ',' << j << ',' << s.provenance[j] << "\n";
    }
  }
  if (!out) throw ValidationError("write failed for " + provenance_path);
}

std::vector<ConstructedSample> load_constructed(const std::string& csv_path,
                                                const std::string& provenance_path) {
  const FeatureFile file = load_feature_csv(csv_path);
  std::vector<ConstructedSample> samples(file.features.rows());
  std::map<long long, std::size_t> by_id;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto row = file.features.row(i);
    samples[i].feature.assign(row.begin(), row.end());
    samples[i].target_class = file.labels[i];
    if (file.ids[i] < 0) {
      throw ValidationError("negative base sample id in " + csv_path);
    }
    samples[i].base_sample = static_cast<std::size_t>(file.ids[i]);
    samples[i].provenance.assign(file.features.cols(), kRetained);
    if (!by_id.emplace(file.ids[i], i).second) {
      throw ValidationError("duplicate base sample id in " + csv_path);
    }
  }

  std::ifstream in(provenance_path);
  if (!in) throw ValidationError("cannot open " + provenance_path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("id,dim,donor_sample_index", 0) != 0) {
    throw ValidationError("bad provenance header in " + provenance_path);
  }
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    long long id, dim, donor;
    if (std::sscanf(line.c_str(), "%lld,%lld,%lld", &id, &dim, &donor) != 3) {
      throw ValidationError("bad provenance row at " + provenance_path + ":" +
                            std::to_string(lineno));
    }
    const auto it = by_id.find(id);
    if (it == by_id.end() || dim < 0 ||
        dim >= static_cast<long long>(file.features.cols()) || donor < kRandomized) {
      throw ValidationError("provenance row out of range at " + provenance_path + ":" +
                            std::to_string(lineno));
    }
    samples[it->second].provenance[static_cast<std::size_t>(dim)] = static_cast<int>(donor);
  }
  return samples;
}

}  // namespace ibsc
