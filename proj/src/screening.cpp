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

#include "ibsc/screening.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>

#include "ibsc/errors.hpp"

namespace ibsc {

std::vector<double> normalize_l1(std::vector<double> raw) {
  double sum = 0.0;
  for (double v : raw) {
    if (v < 0) throw ValidationError("dissimilarity entries must be nonnegative");
    if (!std::isfinite(v)) throw NumericError("non-finite dissimilarity entry");
    sum += v;
  }
  if (sum == 0.0) {
    throw DegeneracyError("dissimilarity vector sums to zero; nothing to normalize");
  }
  for (double& v : raw) v /= sum;
  return raw;
}

DissimilarityVector dissimilarity_attribute(const AttributeTable& attrs, const SplitSpec& split,
                                            int u) {
  split.validate();
  if (u < 0 || u >= static_cast<int>(attrs.num_classes())) {
    throw ValidationError("class id " + std::to_string(u) + " out of range");
  }

  // Scale by the squared pairwise distances over all classes of the table.
  double theta2 = 0.0;
  const std::size_t K = attrs.num_classes();
  for (std::size_t i = 0; i < K; ++i) {
    for (std::size_t j = i + 1; j < K; ++j) {
      theta2 += squared_l2_distance(attrs.continuous.row(i), attrs.continuous.row(j));
    }
  }
  if (theta2 == 0.0) throw DegeneracyError("all class attribute vectors coincide");

  std::vector<double> raw;
  raw.reserve(split.seen.size());
  for (int s : split.seen) {
    if (s >= static_cast<int>(K)) {
      throw ValidationError("seen class " + std::to_string(s) + " outside the attribute table");
    }
    raw.push_back(squared_l2_distance(attrs.continuous.row(u), attrs.continuous.row(s)) / theta2);
  }

  DissimilarityVector out;
  out.values = normalize_l1(std::move(raw));
  out.space = DissimilaritySpace::attribute;
  return out;
}

DissimilarityVector dissimilarity_feature(std::span<const double> sample,
                                          const std::map<int, std::vector<double>>& centroids) {
  if (centroids.size() < 2) {
    throw DegeneracyError("feature dissimilarity needs at least 2 seen centroids");
  }

  double theta2 = 0.0;
  for (auto it = centroids.begin(); it != centroids.end(); ++it) {
    auto jt = it;
    for (++jt; jt != centroids.end(); ++jt) {
      theta2 += squared_l2_distance(it->second, jt->second);
    }
  }
  if (theta2 == 0.0) throw DegeneracyError("seen class centroids coincide");

  std::vector<double> raw;
  raw.reserve(centroids.size());
  for (const auto& [c, centroid] : centroids) {
    raw.push_back(squared_l2_distance(sample, centroid) / theta2);
  }

  DissimilarityVector out;
  out.values = normalize_l1(std::move(raw));
  out.space = DissimilaritySpace::feature;
  return out;
}

double dissimilarity_difference(const std::vector<double>& a, const std::vector<double>& b) {
  return l1_distance(a, b);
}

ScreenResult screen_samples(std::vector<ConstructedSample> samples,
                            const DissimilarityVector& attribute_profile,
                            const std::map<int, std::vector<double>>& centroids,
                            double keep_fraction) {
  if (samples.empty()) throw ValidationError("no samples to screen");
  if (!(keep_fraction > 0.0 && keep_fraction <= 1.0)) {
    throw ValidationError("keep_fraction must be in (0, 1]");
  }
  if (attribute_profile.values.size() != centroids.size()) {
    throw ValidationError("attribute profile and centroid set disagree on seen class count");
  }

  for (auto& s : samples) {
    const DissimilarityVector feat = dissimilarity_feature(s.feature, centroids);
    s.screen_score = dissimilarity_difference(feat.values, attribute_profile.values);
  }

  std::vector<std::size_t> order(samples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double sa = *samples[a].screen_score, sb = *samples[b].screen_score;
    if (sa != sb) return sa < sb;
    return samples[a].base_sample < samples[b].base_sample;
  });

  const std::size_t keep = std::min<std::size_t>(
      samples.size(),
      std::max<std::size_t>(
          1, static_cast<std::size_t>(
                 std::ceil(keep_fraction * static_cast<double>(samples.size())))));

  ScreenResult result;
  result.kept.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i) result.kept.push_back(samples[order[i]]);
  result.scored = std::move(samples);
  return result;
}

void save_screened(const std::vector<ConstructedSample>& samples, const std::string& path) {
  if (samples.empty()) throw ValidationError("no screened samples to write");
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ValidationError("cannot open " + path + " for writing");
  const std::size_t p = samples.front().feature.size();
  out << "id,label";
  for (std::size_t j = 0; j < p; ++j) out << ",f" << j;
  out << ",screen_score\n";
  for (const auto& s : samples) {
    if (s.feature.size() != p) {
      throw ValidationError("screened samples disagree on feature dimension");
    }
    if (!s.screen_score.has_value()) {
      throw ValidationError("screened sample is missing its score");
    }
    out << s.base_sample << ',' << s.target_class;
    for (double v : s.feature) out << ',' << format_double(v);
    out << ',' << format_double(*s.screen_score) << "\n";
  }
  if (!out) throw ValidationError("write failed for " + path);
}

std::vector<ConstructedSample> load_screened(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("empty file: " + path);

  std::vector<std::string> header;
  {
    std::string cur;
    for (char ch : line) {
      if (ch == ',') {
        header.push_back(cur);
        cur.clear();
      } else if (ch != '\r') {
        cur.push_back(ch);
      }
    }
    header.push_back(cur);
  }
  if (header.size() < 4 || header.front() != "id" || header[1] != "label" ||
      header.back() != "screen_score") {
    throw ValidationError("bad screened header in " + path);
  }
  const std::size_t p = header.size() - 3;
  for (std::size_t j = 0; j < p; ++j) {
    if (header[j + 2] != "f" + std::to_string(j)) {
      throw ValidationError("bad screened header column in " + path);
    }
  }

  std::vector<ConstructedSample> samples;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    std::vector<std::string> fields;
    std::string cur;
    for (char ch : line) {
      if (ch == ',') {
        fields.push_back(cur);
        cur.clear();
      } else if (ch != '\r') {
        cur.push_back(ch);
      }
    }
    fields.push_back(cur);
    const std::string where = path + ":" + std::to_string(lineno);
    if (fields.size() != p + 3) {
      throw ValidationError("row with " + std::to_string(fields.size()) +
                            " fields where header declares " + std::to_string(p + 3) + " at " +
                            where);
    }
    ConstructedSample s;
    char* end = nullptr;
    const long long id = std::strtoll(fields[0].c_str(), &end, 10);
    if (end != fields[0].c_str() + fields[0].size() || id < 0) {
      throw ValidationError("bad id field at " + where);
    }
    s.base_sample = static_cast<std::size_t>(id);
    s.target_class = static_cast<int>(std::strtoll(fields[1].c_str(), &end, 10));
    s.feature.resize(p);
    for (std::size_t j = 0; j < p; ++j) {
      s.feature[j] = std::strtod(fields[j + 2].c_str(), &end);
      if (end != fields[j + 2].c_str() + fields[j + 2].size()) {
        throw ValidationError("bad feature field at " + where);
      }
    }
    s.screen_score = std::strtod(fields[p + 2].c_str(), &end);
    if (end != fields[p + 2].c_str() + fields[p + 2].size()) {
      throw ValidationError("bad screen_score field at " + where);
    }
    s.provenance.assign(p, kRetained);
    samples.push_back(std::move(s));
  }
  if (samples.empty()) throw ValidationError("no data rows in " + path);
  return samples;
}

}  // namespace ibsc
