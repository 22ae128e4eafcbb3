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
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ibsc/dataset.hpp"
#include "ibsc/relation.hpp"

namespace ibsc {

// Population mean/std of the pairwise l2 (mu1/sigma1) and l1 (mu2/sigma2)
// continuous-attribute distances over all unordered class pairs.
struct PairwiseStats {
  double mu1 = 0.0, sigma1 = 0.0;
  double mu2 = 0.0, sigma2 = 0.0;
};

PairwiseStats pairwise_stats(const AttributeTable& attrs);

// Standardized l2 distance: lower means the classes look more alike.
double class_similarity(const AttributeTable& attrs, const PairwiseStats& stats, int i, int j);

// Standardized l1 distance: higher means the classes differ more.
double attribute_difference(const AttributeTable& attrs, const PairwiseStats& stats, int i, int j);

// Seen class ids ordered by ascending class_similarity to u; ties break on
// the smaller class id.
std::vector<int> rank_source_candidates(const AttributeTable& attrs, const PairwiseStats& stats,
                                        const SplitSpec& split, int u);

// Count of attributes of u no source class matches on the binary table.
int virtual_attribute_hamming(const AttributeTable& attrs, const std::vector<int>& sources, int u);

// Exact minimum-cost assignment of each row to a distinct column (rows <=
// cols), by shortest augmenting paths over the dual potentials.
struct AssignmentResult {
  std::vector<int> col_of_row;
  double cost = 0.0;
};
AssignmentResult solve_linear_assignment(const Matrix& cost);

// One primary source per unseen class, distinct across unseen classes,
// minimizing the summed class_similarity + attribute_difference.
std::map<int, int> assign_primary_sources(const AttributeTable& attrs, const PairwiseStats& stats,
                                          const SplitSpec& split);

struct SourcePlanEntry {
  int unseen = -1;
  std::vector<int> sources;      // S1 first, then by ascending similarity
  double assignment_cost = 0.0;  // phi + psi at (u, S1)
  int hamming_reference = 0;     // virtual_attribute_hamming of the chosen sources
  std::vector<int> ranked_seen;  // full similarity ordering, used for widening
};

struct SourcePlan {
  std::vector<SourcePlanEntry> entries;  // ascending unseen id
  const SourcePlanEntry& entry_for(int u) const;
};

// Fixed k takes S1 plus the k-1 nearest other seen classes; auto mode grows
// k in [2, k_max] until the sources jointly cover every attribute value of u
// (hamming 0), falling back to k_max.
SourcePlan build_source_plan(const AttributeTable& attrs, const PairwiseStats& stats,
                             const SplitSpec& split, int k, bool auto_k, int k_max);

// Provenance of one constructed feature dim.
constexpr int kRetained = -1;    // copied from the base sample
constexpr int kRandomized = -2;  // overwritten with noise (baselines only)

struct ConstructedSample {
  std::vector<double> feature;
  int target_class = -1;
  std::size_t base_sample = 0;  // row index of the donor base sample
  std::vector<int> provenance;  // per dim: kRetained, kRandomized, or donor row
  std::optional<double> screen_score;
};

// Donor for one differing attribute: the most similar qualifying source class
// (widened to all seen classes when no source matches the target value), then
// within that class the shortlist of m samples nearest to the base sample on
// the environment dims, decided by the calibrated attribute probability.
// Ties keep the smallest sample row index.
std::size_t select_donor_sample(const Dataset& ds, const AttributeTable& attrs,
                                const RelationMatrix& rel, const SourcePlan& plan,
                                const AttributeModels& models, int u,
                                std::size_t base_sample_index, int attr_index, int m);

struct ClassConstruction {
  std::vector<ConstructedSample> samples;
  std::set<int> skipped_attributes;  // attributes no seen sample can cover
};

// One constructed sample per base sample of S1: feature dims of attributes
// whose binary value differs between u and S1 are replaced wholesale from the
// donor sample's values on the attribute's relation row.
ClassConstruction construct_class_samples(const Dataset& ds, const AttributeTable& attrs,
                                          const RelationMatrix& rel, const SourcePlan& plan,
                                          const AttributeModels& models, int u, std::uint64_t seed,
                                          int m = 10);

// Feature dims that construction would replace for u: the union of relation
// rows over the differing, coverable attributes.
std::set<int> replaced_dims(const Dataset& ds, const AttributeTable& attrs,
                            const RelationMatrix& rel, const SourcePlanEntry& entry);

// Plan CSV: "unseen_id,S1,...,Sk,cost,hamming" (rows with fewer sources leave
// the extra source fields empty).
void save_source_plan(const SourcePlan& plan, const std::string& path);

// Constructed samples: a feature CSV whose id column is the base sample row,
// plus a provenance CSV "id,dim,donor_sample_index".
void save_constructed(const std::vector<ConstructedSample>& samples, const std::string& csv_path,
                      const std::string& provenance_path);
std::vector<ConstructedSample> load_constructed(const std::string& csv_path,
                                                const std::string& provenance_path);

}  // namespace ibsc
