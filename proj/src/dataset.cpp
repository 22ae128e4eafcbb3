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

#include "ibsc/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>

#include "ibsc/errors.hpp"

namespace ibsc {

namespace {

std::vector<std::string> split_fields(const std::string& line, char sep = ',') {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == sep) {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& field, const std::string& where) {
  const std::string t = trim(field);
  if (t.empty()) throw ValidationError("empty numeric field at " + where);
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size()) {
    throw ValidationError("cannot parse number '" + t + "' at " + where);
  }
  return v;
}

long long parse_int(const std::string& field, const std::string& where) {
  const std::string t = trim(field);
  if (t.empty()) throw ValidationError("empty integer field at " + where);
  char* end = nullptr;
  const long long v = std::strtoll(t.c_str(), &end, 10);
  if (end != t.c_str() + t.size()) {
    throw ValidationError("cannot parse integer '" + t + "' at " + where);
  }
  return v;
}

std::ifstream open_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  return in;
}

std::ofstream open_text_out(const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ValidationError("cannot open " + path + " for writing");
  return out;
}

void check_header(const std::vector<std::string>& fields, const std::string& id_name,
                  const std::vector<std::string>& fixed, const std::string& prefix,
                  const std::string& path) {
  if (fields.size() < fixed.size() + 1) {
    throw ValidationError("header too short in " + path);
  }
  for (std::size_t i = 0; i < fixed.size(); ++i) {
    if (trim(fields[i]) != fixed[i]) {
      throw ValidationError("bad header column " + std::to_string(i) + " in " + path +
                            ": expected '" + fixed[i] + "', got '" + trim(fields[i]) + "'");
    }
  }
  for (std::size_t i = fixed.size(); i < fields.size(); ++i) {
    const std::string expect = prefix + std::to_string(i - fixed.size());
    if (trim(fields[i]) != expect) {
      throw ValidationError("bad header column " + std::to_string(i) + " in " + path +
                            ": expected '" + expect + "', got '" + trim(fields[i]) + "'");
    }
  }
  (void)id_name;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  // Prefer the shorter %.nng form when it round-trips, for readable files.
  for (int prec = 1; prec < 17; ++prec) {
    char cand[64];
    std::snprintf(cand, sizeof(cand), "%.*g", prec, v);
    if (std::strtod(cand, nullptr) == v) return cand;
  }
  return buf;
}

void Dataset::validate() const {
  if (n() == 0 || p() == 0) throw ValidationError("dataset must have n >= 1 and p >= 1");
  if (labels.size() != n()) {
    throw ValidationError("label count " + std::to_string(labels.size()) +
                          " does not match sample count " + std::to_string(n()));
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0) {
      throw ValidationError("negative class id at row " + std::to_string(i));
    }
    if (!class_names.empty() && labels[i] >= static_cast<int>(class_names.size())) {
      throw ValidationError("unknown class id " + std::to_string(labels[i]) + " at row " +
                            std::to_string(i));
    }
  }
}

void AttributeTable::validate() const {
  if (continuous.rows() == 0 || continuous.cols() == 0) {
    throw ValidationError("attribute table must have K >= 1 and d >= 1");
  }
  if (binary.rows() != continuous.rows() || binary.cols() != continuous.cols()) {
    throw ValidationError("continuous and binary attribute tables disagree on shape");
  }
  for (std::size_t r = 0; r < binary.rows(); ++r) {
    for (std::size_t c = 0; c < binary.cols(); ++c) {
      const double b = binary(r, c);
      if (b != 0.0 && b != 1.0) {
        throw ValidationError("binary attribute (" + std::to_string(r) + "," + std::to_string(c) +
                              ") is " + format_double(b) + ", expected 0 or 1");
      }
      const double v = continuous(r, c);
      if (!std::isfinite(v)) {
        throw ValidationError("continuous attribute (" + std::to_string(r) + "," +
                              std::to_string(c) + ") is not finite");
      }
    }
  }
}

void SplitSpec::validate() const {
  if (seen.size() < 2) throw ValidationError("split needs at least 2 seen classes");
  if (unseen.empty()) throw ValidationError("split needs at least 1 unseen class");
  for (int c : seen) {
    if (c < 0) throw ValidationError("negative class id in seen set");
    if (unseen.count(c)) {
      throw ValidationError("class " + std::to_string(c) + " is both seen and unseen");
    }
  }
  for (int c : unseen) {
    if (c < 0) throw ValidationError("negative class id in unseen set");
  }
}

FeatureFile load_feature_csv(const std::string& path) {
  std::ifstream in = open_text(path);
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("empty file: " + path);

  const auto header = split_fields(line);
  check_header(header, "id", {"id", "label"}, "f", path);
  const std::size_t p = header.size() - 2;
  if (p == 0) throw ValidationError("no feature columns in " + path);

  FeatureFile file;
  std::vector<std::vector<double>> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    const std::string where = path + ":" + std::to_string(lineno);
    if (fields.size() != p + 2) {
      throw ValidationError("row with " + std::to_string(fields.size()) +
                            " fields where header declares " + std::to_string(p + 2) + " at " +
                            where);
    }
    file.ids.push_back(parse_int(fields[0], where));
    const long long label = parse_int(fields[1], where);
    file.labels.push_back(static_cast<int>(label));
    std::vector<double> row(p);
    for (std::size_t j = 0; j < p; ++j) row[j] = parse_double(fields[j + 2], where);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ValidationError("no data rows in " + path);
  file.features = Matrix::from_rows(rows);
  return file;
}

void save_feature_csv(const std::string& path, const FeatureFile& file) {
  std::ofstream out = open_text_out(path);
  out << "id,label";
  for (std::size_t j = 0; j < file.features.cols(); ++j) out << ",f" << j;
  out << "\n";
  for (std::size_t i = 0; i < file.features.rows(); ++i) {
    out << file.ids[i] << ',' << file.labels[i];
    for (std::size_t j = 0; j < file.features.cols(); ++j) {
      out << ',' << format_double(file.features(i, j));
    }
    out << "\n";
  }
  if (!out) throw ValidationError("write failed for " + path);
}

namespace {

Dataset dataset_from_parts(Matrix features, std::vector<int> labels) {
  Dataset ds;
  ds.features = std::move(features);
  ds.labels = std::move(labels);
  int max_label = -1;
  for (int l : ds.labels) {
    if (l < 0) throw ValidationError("negative class id in dataset");
    max_label = std::max(max_label, l);
  }
  ds.class_names.reserve(static_cast<std::size_t>(max_label) + 1);
  for (int c = 0; c <= max_label; ++c) ds.class_names.push_back("class_" + std::to_string(c));
  ds.validate();
  return ds;
}

}  // namespace

Dataset load_dataset(const std::string& path, FileFormat format) {
  if (format == FileFormat::csv) {
    FeatureFile file = load_feature_csv(path);
    return dataset_from_parts(std::move(file.features), std::move(file.labels));
  }

  // Binary layout mirrors the CSV columns: id, label, then features.
  const Matrix raw = load_matrix_binary(path);
  if (raw.cols() < 3) {
    throw ValidationError("binary dataset in " + path + " needs id, label and >= 1 feature column");
  }
  const std::size_t p = raw.cols() - 2;
  Matrix features(raw.rows(), p);
  std::vector<int> labels(raw.rows());
  for (std::size_t i = 0; i < raw.rows(); ++i) {
    const double lab = raw(i, 1);
    if (lab != std::floor(lab) || lab < 0) {
      throw ValidationError("non-integer or negative label at row " + std::to_string(i) + " in " +
                            path);
    }
    labels[i] = static_cast<int>(lab);
    for (std::size_t j = 0; j < p; ++j) features(i, j) = raw(i, j + 2);
  }
  return dataset_from_parts(std::move(features), std::move(labels));
}

void save_dataset(const std::string& path, FileFormat format, const Dataset& ds) {
  ds.validate();
  if (format == FileFormat::csv) {
    FeatureFile file;
    file.features = ds.features;
    file.labels = ds.labels;
    file.ids.resize(ds.n());
    for (std::size_t i = 0; i < ds.n(); ++i) file.ids[i] = static_cast<long long>(i);
    save_feature_csv(path, file);
    return;
  }
  Matrix raw(ds.n(), ds.p() + 2);
  for (std::size_t i = 0; i < ds.n(); ++i) {
    raw(i, 0) = static_cast<double>(i);
    raw(i, 1) = static_cast<double>(ds.labels[i]);
    for (std::size_t j = 0; j < ds.p(); ++j) raw(i, j + 2) = ds.features(i, j);
  }
  save_matrix_binary(path, raw);
}

namespace {

Matrix load_attribute_csv(const std::string& path) {
  std::ifstream in = open_text(path);
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("empty file: " + path);

  const auto header = split_fields(line);
  check_header(header, "class", {"class"}, "a", path);
  const std::size_t d = header.size() - 1;
  if (d == 0) throw ValidationError("no attribute columns in " + path);

  std::vector<std::vector<double>> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    const std::string where = path + ":" + std::to_string(lineno);
    if (fields.size() != d + 1) {
      throw ValidationError("row with " + std::to_string(fields.size()) +
                            " fields where header declares " + std::to_string(d + 1) + " at " +
                            where);
    }
    const long long cls = parse_int(fields[0], where);
    if (cls != static_cast<long long>(rows.size())) {
      throw ValidationError("class column must equal row index at " + where + ": got " +
                            std::to_string(cls) + ", expected " + std::to_string(rows.size()));
    }
    std::vector<double> row(d);
    for (std::size_t j = 0; j < d; ++j) row[j] = parse_double(fields[j + 1], where);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ValidationError("no data rows in " + path);
  return Matrix::from_rows(rows);
}

void save_attribute_csv(const std::string& path, const Matrix& m) {
  std::ofstream out = open_text_out(path);
  out << "class";
  for (std::size_t j = 0; j < m.cols(); ++j) out << ",a" << j;
  out << "\n";
  for (std::size_t i = 0; i < m.rows(); ++i) {
    out << i;
    for (std::size_t j = 0; j < m.cols(); ++j) out << ',' << format_double(m(i, j));
    out << "\n";
  }
  if (!out) throw ValidationError("write failed for " + path);
}

}  // namespace

AttributeTable load_attribute_table(const std::string& continuous_path,
                                    const std::string& binary_path) {
  AttributeTable attrs;
  attrs.continuous = load_attribute_csv(continuous_path);
  attrs.binary = load_attribute_csv(binary_path);
  attrs.validate();
  return attrs;
}

void save_attribute_table(const std::string& continuous_path, const std::string& binary_path,
                          const AttributeTable& attrs) {
  attrs.validate();
  save_attribute_csv(continuous_path, attrs.continuous);
  save_attribute_csv(binary_path, attrs.binary);
}

namespace {

std::set<int> parse_id_list(const std::string& text, const std::string& path) {
  std::set<int> ids;
  for (const std::string& field : split_fields(text)) {
    const std::string t = trim(field);
    if (t.empty()) continue;
    const long long v = parse_int(t, path);
    if (!ids.insert(static_cast<int>(v)).second) {
      throw ValidationError("duplicate class id " + t + " in " + path);
    }
  }
  return ids;
}

}  // namespace

SplitSpec load_split(const std::string& path) {
  std::ifstream in = open_text(path);
  SplitSpec split;
  std::string line;
  bool have_seen = false, have_unseen = false;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (t.rfind("seen:", 0) == 0) {
      if (have_seen) throw ValidationError("duplicate 'seen:' line in " + path);
      split.seen = parse_id_list(t.substr(5), path);
      have_seen = true;
    } else if (t.rfind("unseen:", 0) == 0) {
      if (have_unseen) throw ValidationError("duplicate 'unseen:' line in " + path);
      split.unseen = parse_id_list(t.substr(7), path);
      have_unseen = true;
    } else {
      throw ValidationError("unrecognized line in " + path + ": '" + t + "'");
    }
  }
  if (!have_seen || !have_unseen) {
    throw ValidationError(path + " must contain one 'seen:' and one 'unseen:' line");
  }
  split.validate();
  return split;
}

void save_split(const std::string& path, const SplitSpec& split) {
  split.validate();
  std::ofstream out = open_text_out(path);
  out << "seen:";
  bool first = true;
  for (int c : split.seen) {
    out << (first ? " " : ",") << c;
    first = false;
  }
  out << "\nunseen:";
  first = true;
  for (int c : split.unseen) {
    out << (first ? " " : ",") << c;
    first = false;
  }
  out << "\n";
  if (!out) throw ValidationError("write failed for " + path);
}

void validate_inputs(const Dataset& ds, const AttributeTable& attrs, const SplitSpec& split) {
  ds.validate();
  attrs.validate();
  split.validate();
  const int K = static_cast<int>(attrs.num_classes());
  for (std::size_t i = 0; i < ds.labels.size(); ++i) {
    const int l = ds.labels[i];
    if (l >= K) {
      throw ValidationError("sample row " + std::to_string(i) + " references class " +
                            std::to_string(l) + " outside the attribute table (K=" +
                            std::to_string(K) + ")");
    }
    if (!split.is_seen(l) && !split.is_unseen(l)) {
      throw ValidationError("class " + std::to_string(l) +
                            " has samples but appears in neither split set");
    }
  }
  for (int c : split.seen) {
    if (c >= K) {
      throw ValidationError("seen class " + std::to_string(c) + " outside the attribute table");
    }
  }
  for (int c : split.unseen) {
    if (c >= K) {
      throw ValidationError("unseen class " + std::to_string(c) + " outside the attribute table");
    }
  }
}

std::map<int, std::vector<double>> class_centroids(const Dataset& ds,
                                                   const std::set<int>& classes) {
  std::map<int, std::vector<double>> out;
  std::map<int, std::size_t> counts;
  for (int c : classes) {
    out.emplace(c, std::vector<double>(ds.p(), 0.0));
    counts.emplace(c, 0);
  }
  for (std::size_t i = 0; i < ds.n(); ++i) {
    auto it = out.find(ds.labels[i]);
    if (it == out.end()) continue;
    const auto row = ds.features.row(i);
    for (std::size_t j = 0; j < ds.p(); ++j) it->second[j] += row[j];
    ++counts[ds.labels[i]];
  }
  for (auto& [c, acc] : out) {
    const std::size_t cnt = counts[c];
    if (cnt == 0) {
      throw DegeneracyError("class " + std::to_string(c) + " has no samples");
    }
    for (double& v : acc) v /= static_cast<double>(cnt);
  }
  return out;
}

std::vector<std::size_t> seen_sample_indices(const Dataset& ds, const SplitSpec& split) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < ds.n(); ++i) {
    if (split.is_seen(ds.labels[i])) idx.push_back(i);
  }
  return idx;
}

}  // namespace ibsc
