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

#include <map>
#include <string>
#include <vector>

#include "ibsc/construction.hpp"
#include "ibsc/dataset.hpp"

namespace ibsc {

// Dissimilarity representation: squared l2 distances to the seen classes,
// scaled by the summed squared pairwise distance of the space and then
// l1-normalized so both spaces are comparable.
enum class DissimilaritySpace { attribute, feature };

struct DissimilarityVector {
  std::vector<double> values;  // one entry per seen class, ascending class id
  DissimilaritySpace space = DissimilaritySpace::attribute;
};

// Divides by the sum; requires nonnegative entries and a positive sum.
std::vector<double> normalize_l1(std::vector<double> raw);

// Attribute-space dissimilarity of class u to every seen class, over the
// continuous attribute vectors.  The scale uses all class pairs.
DissimilarityVector dissimilarity_attribute(const AttributeTable& attrs, const SplitSpec& split,
                                            int u);

// Feature-space dissimilarity of one sample to the seen class centroids.
// The scale uses all centroid pairs.
DissimilarityVector dissimilarity_feature(std::span<const double> sample,
                                          const std::map<int, std::vector<double>>& centroids);

// l1 distance between two dissimilarity profiles (lower = better matched).
double dissimilarity_difference(const std::vector<double>& a, const std::vector<double>& b);

struct ScreenResult {
  std::vector<ConstructedSample> scored;  // input order, screen_score filled
  std::vector<ConstructedSample> kept;    // ascending score, ties on base_sample
};

// Scores every constructed sample by how far its feature-space profile sits
// from the class's attribute-space profile, then keeps the best
// ceil(keep_fraction * count) samples (at least one).
ScreenResult screen_samples(std::vector<ConstructedSample> samples,
                            const DissimilarityVector& attribute_profile,
                            const std::map<int, std::vector<double>>& centroids,
                            double keep_fraction);

// Screened CSV: the constructed layout plus a trailing screen_score column.
void save_screened(const std::vector<ConstructedSample>& samples, const std::string& path);
std::vector<ConstructedSample> load_screened(const std::string& path);

}  // namespace ibsc
