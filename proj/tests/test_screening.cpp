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
#include <limits>
#include <random>

#include "ibsc/errors.hpp"
#include "ibsc/screening.hpp"
#include "test_util.hpp"

using namespace ibsc;
using test_util::TempDir;

namespace {

ConstructedSample sample_at(std::vector<double> feature, std::size_t base) {
  ConstructedSample s;
  s.feature = std::move(feature);
  s.target_class = 0;
  s.base_sample = base;
  s.provenance.assign(s.feature.size(), kRetained);
  return s;
}

std::vector<std::size_t> kept_bases(const ScreenResult& r) {
  std::vector<std::size_t> out;
  for (const auto& s : r.kept) out.push_back(s.base_sample);
  return out;
}

}  // namespace

TEST_CASE("l1 normalization divides by the sum and rejects bad input") {
  const std::vector<double> v = normalize_l1({1.0, 3.0});
  CHECK(v == std::vector<double>{0.25, 0.75});
  CHECK_THROWS_AS(normalize_l1({1.0, -0.5}), ValidationError);
  CHECK_THROWS_AS(normalize_l1({1.0, std::numeric_limits<double>::quiet_NaN()}), NumericError);
  CHECK_THROWS_AS(normalize_l1({0.0, 0.0}), DegeneracyError);
}

TEST_CASE("normalized vectors are bit-identical under dyadic scaling of raw distances") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> unif(0.01, 5.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> raw(6);
    for (double& v : raw) v = unif(rng);
    const std::vector<double> base = normalize_l1(raw);

    // Power-of-two scaling is exact in binary floating point.
    for (double c : {0.25, 2.0, 1024.0}) {
      std::vector<double> scaled = raw;
      for (double& v : scaled) v *= c;
      CHECK(normalize_l1(scaled) == base);
    }
    // Arbitrary positive scaling agrees to rounding error.
    std::vector<double> odd = raw;
    for (double& v : odd) v *= 3.0;
    const std::vector<double> other = normalize_l1(odd);
    for (std::size_t i = 0; i < base.size(); ++i) {
      CHECK(other[i] == doctest::Approx(base[i]).epsilon(1e-14));
    }
  }
}

TEST_CASE("attribute dissimilarity of the symmetric example is (0.5, 0.5)") {
  AttributeTable attrs;
  attrs.continuous = Matrix::from_rows({{3.0, 4.0}, {0.0, 5.0}, {0.0, 0.0}});
  attrs.binary = Matrix::from_rows({{1.0, 1.0}, {0.0, 1.0}, {0.0, 0.0}});
  SplitSpec split;
  split.seen = {0, 1};
  split.unseen = {2};
  const DissimilarityVector d = dissimilarity_attribute(attrs, split, 2);
  CHECK(d.space == DissimilaritySpace::attribute);
  CHECK(d.values == std::vector<double>{0.5, 0.5});
}

TEST_CASE("attribute dissimilarity vanishes on an attribute twin and sums to one") {
  AttributeTable attrs;
  attrs.continuous = Matrix::from_rows({{0.2, 0.8}, {0.7, 0.3}, {0.9, 0.1}, {0.2, 0.8}});
  attrs.binary = Matrix::from_rows({{0.0, 1.0}, {1.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}});
  SplitSpec split;
  split.seen = {0, 1, 2};
  split.unseen = {3};
  const DissimilarityVector d = dissimilarity_attribute(attrs, split, 3);
  CHECK(d.values[0] == 0.0);  // class 0 is u's twin
  double sum = 0.0;
  for (double v : d.values) sum += v;
  CHECK(std::abs(sum - 1.0) <= 1e-9);

  AttributeTable flat;
  flat.continuous = Matrix(3, 2, 0.5);
  flat.binary = Matrix(3, 2, 1.0);
  CHECK_THROWS_AS(dissimilarity_attribute(flat, split, 2), DegeneracyError);
}

TEST_CASE("feature dissimilarity mirrors the attribute construction") {
  std::map<int, std::vector<double>> centroids{{0, {0.0, 0.0}}, {1, {4.0, 0.0}}};
  const DissimilarityVector mid = dissimilarity_feature(std::vector<double>{2.0, 0.0}, centroids);
  CHECK(mid.space == DissimilaritySpace::feature);
  CHECK(mid.values == std::vector<double>{0.5, 0.5});

  const DissimilarityVector at0 = dissimilarity_feature(std::vector<double>{0.0, 0.0}, centroids);
  CHECK(at0.values[0] == 0.0);
  CHECK(at0.values[1] == 1.0);

  std::map<int, std::vector<double>> coincident{{0, {1.0, 1.0}}, {1, {1.0, 1.0}}};
  CHECK_THROWS_AS(dissimilarity_feature(std::vector<double>{0.0, 0.0}, coincident),
                  DegeneracyError);
  std::map<int, std::vector<double>> lone{{0, {1.0, 1.0}}};
  CHECK_THROWS_AS(dissimilarity_feature(std::vector<double>{0.0, 0.0}, lone), DegeneracyError);
}

TEST_CASE("profile difference is the l1 norm of the component difference") {
  // Matched attribute/feature profiles differ by 0.03; a shuffled profile
  // differs by far more, so the matched pair screens better.
  const std::vector<double> attr_profile{0.20, 0.80, 0.70};
  const std::vector<double> matched{0.19, 0.80, 0.72};
  const std::vector<double> shuffled{0.70, 0.10, 0.20};
  CHECK(dissimilarity_difference(matched, attr_profile) ==
        doctest::Approx(0.03).epsilon(1e-9));
  CHECK(dissimilarity_difference(matched, attr_profile) <
        dissimilarity_difference(shuffled, attr_profile));
  CHECK(dissimilarity_difference(attr_profile, attr_profile) == 0.0);
}

TEST_CASE("screening keeps the best-matched ceil fraction") {
  // Centroids straddle the attribute profile's ideal point at (2, 0): samples
  // further from the midpoint score progressively worse.
  std::map<int, std::vector<double>> centroids{{0, {0.0, 0.0}}, {1, {4.0, 0.0}}};
  DissimilarityVector attr_profile;
  attr_profile.space = DissimilaritySpace::attribute;
  attr_profile.values = {0.5, 0.5};

  std::vector<ConstructedSample> samples;
  samples.push_back(sample_at({0.5, 0.0}, 0));  // worst match
  samples.push_back(sample_at({2.0, 0.0}, 1));  // exact match, score 0
  samples.push_back(sample_at({1.5, 0.0}, 2));
  samples.push_back(sample_at({1.0, 0.0}, 3));

  const ScreenResult half = screen_samples(samples, attr_profile, centroids, 0.5);
  CHECK(kept_bases(half) == std::vector<std::size_t>{1, 2});
  CHECK(*half.kept[0].screen_score == 0.0);
  // Scored output preserves the input order and fills every score.
  REQUIRE(half.scored.size() == 4);
  CHECK(half.scored[0].base_sample == 0);
  for (std::size_t i = 1; i < half.scored.size(); ++i) {
    CHECK(half.scored[i].screen_score.has_value());
  }
  // Kept scores are non-decreasing.
  for (std::size_t i = 1; i < half.kept.size(); ++i) {
    CHECK(*half.kept[i - 1].screen_score <= *half.kept[i].screen_score);
  }

  const ScreenResult all = screen_samples(samples, attr_profile, centroids, 1.0);
  CHECK(all.kept.size() == 4);

  // ceil(0.5 * 3) = 2 of 3; a single sample always survives.
  const ScreenResult of3 = screen_samples(
      {samples[0], samples[1], samples[2]}, attr_profile, centroids, 0.5);
  CHECK(of3.kept.size() == 2);
  const ScreenResult of1 = screen_samples({samples[0]}, attr_profile, centroids, 0.1);
  CHECK(of1.kept.size() == 1);

  // Reducing keep_fraction never adds a sample.
  const ScreenResult quarter = screen_samples(samples, attr_profile, centroids, 0.25);
  for (std::size_t b : kept_bases(quarter)) {
    CHECK(std::find(kept_bases(half).begin(), kept_bases(half).end(), b) !=
          kept_bases(half).end());
  }

  CHECK_THROWS_AS(screen_samples({}, attr_profile, centroids, 0.5), ValidationError);
  CHECK_THROWS_AS(screen_samples(samples, attr_profile, centroids, 0.0), ValidationError);
  CHECK_THROWS_AS(screen_samples(samples, attr_profile, centroids, 1.5), ValidationError);
}

TEST_CASE("screening ties resolve by base sample index") {
  std::map<int, std::vector<double>> centroids{{0, {0.0, 0.0}}, {1, {4.0, 0.0}}};
  DissimilarityVector attr_profile;
  attr_profile.values = {0.5, 0.5};
  std::vector<ConstructedSample> samples;
  samples.push_back(sample_at({1.0, 0.0}, 9));
  samples.push_back(sample_at({1.0, 0.0}, 3));
  const ScreenResult r = screen_samples(samples, attr_profile, centroids, 0.5);
  REQUIRE(r.kept.size() == 1);
  CHECK(r.kept[0].base_sample == 3);
}

TEST_CASE("screened CSV round-trips scores exactly") {
  std::vector<ConstructedSample> samples;
  samples.push_back(sample_at({1.25, -2.0, 1.0 / 3.0}, 4));
  samples.push_back(sample_at({0.0, 7.5, 0.1}, 6));
  samples[0].target_class = 3;
  samples[1].target_class = 3;
  samples[0].screen_score = 0.125;
  samples[1].screen_score = 1.0 / 7.0;

  TempDir tmp;
  save_screened(samples, tmp.file("s.csv"));
  const auto back = load_screened(tmp.file("s.csv"));
  REQUIRE(back.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(back[i].feature == samples[i].feature);
    CHECK(back[i].target_class == samples[i].target_class);
    CHECK(back[i].base_sample == samples[i].base_sample);
    CHECK(*back[i].screen_score == *samples[i].screen_score);
  }

  // Unscored samples cannot be written; malformed files cannot be read.
  samples[1].screen_score.reset();
  CHECK_THROWS_AS(save_screened(samples, tmp.file("bad.csv")), ValidationError);
  test_util::write_text(tmp.file("h.csv"), "id,label,f0\n0,0,1\n");
  CHECK_THROWS_AS(load_screened(tmp.file("h.csv")), ValidationError);
  test_util::write_text(tmp.file("short.csv"), "id,label,f0,screen_score\n0,0,1\n");
  CHECK_THROWS_AS(load_screened(tmp.file("short.csv")), ValidationError);
}
