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

#include "ibsc/relation.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

#include "ibsc/errors.hpp"
#include "ibsc/parallel.hpp"

namespace ibsc {

std::vector<int> attribute_labels(const Dataset& ds, const AttributeTable& attrs,
                                  const SplitSpec& split, int attr_index) {
  if (attr_index < 0 || attr_index >= static_cast<int>(attrs.num_attributes())) {
    throw ValidationError("attribute index " + std::to_string(attr_index) + " out of range [0, " +
                          std::to_string(attrs.num_attributes()) + ")");
  }
  std::vector<int> labels;
  for (std::size_t i : seen_sample_indices(ds, split)) {
    labels.push_back(static_cast<int>(attrs.binary(ds.labels[i], attr_index)));
  }
  return labels;
}

RelationBuild build_relation_and_models(const Dataset& ds, const AttributeTable& attrs,
                                        const SplitSpec& split, double lambda, std::uint64_t seed,
                                        int threads) {
  validate_inputs(ds, attrs, split);
  if (!(lambda > 0)) throw ValidationError("lambda must be positive");

  const std::vector<std::size_t> seen_rows = seen_sample_indices(ds, split);
  if (seen_rows.empty()) throw DegeneracyError("no samples belong to seen classes");

  Matrix X_seen(seen_rows.size(), ds.p());
  for (std::size_t i = 0; i < seen_rows.size(); ++i) {
    const auto src = ds.features.row(seen_rows[i]);
    std::copy(src.begin(), src.end(), X_seen.row(i).begin());
  }

  const std::size_t d = attrs.num_attributes();
  RelationBuild out;
  out.relation.R = Matrix(d, ds.p(), 0.0);
  out.models.models.assign(d, std::nullopt);

  std::vector<int> degenerate_flags(d, 0);
  parallel_for(d, threads, [&](std::size_t a) {
    std::vector<int> labels(seen_rows.size());
    for (std::size_t i = 0; i < seen_rows.size(); ++i) {
      labels[i] = static_cast<int>(attrs.binary(ds.labels[seen_rows[i]], a));
    }
    const bool has0 = std::find(labels.begin(), labels.end(), 0) != labels.end();
    const bool has1 = std::find(labels.begin(), labels.end(), 1) != labels.end();
    if (!has0 || !has1) {
      degenerate_flags[a] = 1;
      return;  // row stays all-zero, no model
    }
    SparseLinearModel model = train_l1_linear(X_seen, labels, lambda, 1e-6, 1000,
                                              seed + static_cast<std::uint64_t>(a));
    const auto mask = nonzero_weight_mask(model.weights);
    for (std::size_t j = 0; j < mask.size(); ++j) {
      if (mask[j]) out.relation.R(a, j) = 1.0;
    }
    out.models.models[a] = calibrate_probability(model, X_seen, labels);
  });

  for (std::size_t a = 0; a < d; ++a) {
    if (degenerate_flags[a]) out.relation.degenerate_rows.insert(static_cast<int>(a));
  }
  return out;
}

RelationMatrix build_relation_matrix(const Dataset& ds, const AttributeTable& attrs,
                                     const SplitSpec& split, double lambda, std::uint64_t seed,
                                     int threads) {
  return build_relation_and_models(ds, attrs, split, lambda, seed, threads).relation;
}

std::set<int> environment_dims(const RelationMatrix& rel) {
  std::set<int> dims;
  for (std::size_t j = 0; j < rel.feature_dim(); ++j) {
    bool claimed = false;
    for (std::size_t a = 0; a < rel.num_attributes(); ++a) {
      if (rel.R(a, j) != 0.0) {
        claimed = true;
        break;
      }
    }
    if (!claimed) dims.insert(static_cast<int>(j));
  }
  return dims;
}

void save_relation(const RelationMatrix& rel, const std::string& matrix_path,
                   const std::string& degenerate_path) {
  save_matrix_binary(matrix_path, rel.R);
  std::ofstream out(degenerate_path, std::ios::trunc);
  if (!out) throw ValidationError("cannot open " + degenerate_path + " for writing");
  for (int a : rel.degenerate_rows) out << a << "\n";
  if (!out) throw ValidationError("write failed for " + degenerate_path);
}

RelationMatrix load_relation(const std::string& matrix_path, const std::string& degenerate_path) {
  RelationMatrix rel;
  rel.R = load_matrix_binary(matrix_path);
  for (std::size_t a = 0; a < rel.R.rows(); ++a) {
    for (std::size_t j = 0; j < rel.R.cols(); ++j) {
      const double v = rel.R(a, j);
      if (v != 0.0 && v != 1.0) {
        throw ValidationError("relation entry (" + std::to_string(a) + "," + std::to_string(j) +
                              ") is not binary in " + matrix_path);
      }
    }
  }
  std::ifstream in(degenerate_path);
  if (!in) throw ValidationError("cannot open " + degenerate_path);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const int a = std::stoi(line);
    if (a < 0 || a >= static_cast<int>(rel.R.rows())) {
      throw ValidationError("degenerate row index " + line + " out of range in " +
                            degenerate_path);
    }
    rel.degenerate_rows.insert(a);
  }
  return rel;
}

namespace {

nlohmann::ordered_json model_to_json(const CalibratedModel& m) {
  nlohmann::ordered_json j;
  j["weights"] = m.base.weights;
  j["bias"] = m.base.bias;
  j["lambda"] = m.base.lambda;
  j["nonzero_count"] = m.base.nonzero_count;
  j["standardized"] = m.base.standardized;
  j["feature_mean"] = m.base.feature_mean;
  j["feature_scale"] = m.base.feature_scale;
  j["slope"] = m.slope;
  j["intercept"] = m.intercept;
  return j;
}

CalibratedModel model_from_json(const nlohmann::json& j) {
  CalibratedModel m;
  m.base.weights = j.at("weights").get<std::vector<double>>();
  m.base.bias = j.at("bias").get<double>();
  m.base.lambda = j.at("lambda").get<double>();
  m.base.nonzero_count = j.at("nonzero_count").get<int>();
  m.base.standardized = j.at("standardized").get<bool>();
  m.base.feature_mean = j.at("feature_mean").get<std::vector<double>>();
  m.base.feature_scale = j.at("feature_scale").get<std::vector<double>>();
  m.slope = j.at("slope").get<double>();
  m.intercept = j.at("intercept").get<double>();
  if (m.slope == 0.0) throw ValidationError("calibrated slope must be nonzero");
  return m;
}

}  // namespace

void save_attribute_models(const AttributeModels& models, const std::string& path) {
  nlohmann::ordered_json j;
  j["attributes"] = models.models.size();
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& m : models.models) {
    if (m.has_value()) {
      arr.push_back(model_to_json(*m));
    } else {
      arr.push_back(nullptr);
    }
  }
  j["models"] = std::move(arr);
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ValidationError("cannot open " + path + " for writing");
  out << j.dump(2) << "\n";
  if (!out) throw ValidationError("write failed for " + path);
}

AttributeModels load_attribute_models(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("cannot parse " + path + ": " + e.what());
  }
  AttributeModels models;
  try {
    const auto& arr = j.at("models");
    for (const auto& item : arr) {
      if (item.is_null()) {
        models.models.emplace_back(std::nullopt);
      } else {
        models.models.emplace_back(model_from_json(item));
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("malformed model file " + path + ": " + e.what());
  }
  return models;
}

}  // namespace ibsc
