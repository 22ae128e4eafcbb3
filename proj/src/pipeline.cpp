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

#include "ibsc/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "ibsc/errors.hpp"
#include "ibsc/eval.hpp"
#include "ibsc/parallel.hpp"
#include "ibsc/screening.hpp"

namespace fs = std::filesystem;

namespace ibsc {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& v, const std::string& key) {
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (end != v.c_str() + v.size() || v.empty()) {
    throw ValidationError("config value for " + key + " is not a number: '" + v + "'");
  }
  return x;
}

long long to_int(const std::string& v, const std::string& key) {
  char* end = nullptr;
  const long long x = std::strtoll(v.c_str(), &end, 10);
  if (end != v.c_str() + v.size() || v.empty()) {
    throw ValidationError("config value for " + key + " is not an integer: '" + v + "'");
  }
  return x;
}

bool to_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ValidationError("config value for " + key + " is not a boolean: '" + v + "'");
}

void validate_params(const PipelineConfig& cfg) {
  const RunParams& p = cfg.params;
  if (!(p.lambda > 0)) throw ValidationError("relation.lambda must be positive");
  if (p.k < 1) throw ValidationError("construct.k must be >= 1");
  if (p.k_max < 2) throw ValidationError("construct.k_max must be >= 2");
  if (p.shortlist < 1) throw ValidationError("construct.shortlist must be >= 1");
  if (!(p.keep_fraction > 0 && p.keep_fraction <= 1)) {
    throw ValidationError("screen.keep_fraction must be in (0, 1]");
  }
  if (!(p.ovr_lambda > 0)) throw ValidationError("eval.ovr_lambda must be positive");
  if (cfg.threads < 0) throw ValidationError("run.threads must be >= 0");
}

}  // namespace

PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config " + path);

  PipelineConfig cfg;
  SynthConfig synth;
  bool have_synth = false;

  std::string section;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    const std::string where = path + ":" + std::to_string(lineno);

    if (t.front() == '[') {
      if (t.back() != ']') throw ValidationError("malformed section header at " + where);
      section = trim(t.substr(1, t.size() - 2));
      if (section != "paths" && section != "synth" && section != "relation" &&
          section != "construct" && section != "screen" && section != "eval" &&
          section != "run") {
        throw ValidationError("unknown config section [" + section + "] at " + where);
      }
      if (section == "synth") have_synth = true;
      continue;
    }

    const std::size_t eq = t.find('=');
    if (eq == std::string::npos) {
      throw ValidationError("expected key = value at " + where);
    }
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    const std::string qual = section + "." + key;

    if (section == "paths") {
      if (key == "features") cfg.features_path = value;
      else if (key == "attributes_continuous") cfg.attributes_continuous_path = value;
      else if (key == "attributes_binary") cfg.attributes_binary_path = value;
      else if (key == "split") cfg.split_path = value;
      else if (key == "output_dir") cfg.output_dir = value;
      else if (key == "format") {
        if (value == "csv") cfg.feature_format = FileFormat::csv;
        else if (value == "binary") cfg.feature_format = FileFormat::binary;
        else throw ValidationError("paths.format must be csv or binary at " + where);
      } else throw ValidationError("unknown config key " + qual + " at " + where);
    } else if (section == "synth") {
      if (key == "seen_classes") synth.seen_classes = static_cast<int>(to_int(value, qual));
      else if (key == "unseen_classes") synth.unseen_classes = static_cast<int>(to_int(value, qual));
      else if (key == "attributes") synth.attributes = static_cast<int>(to_int(value, qual));
      else if (key == "block_width") synth.block_width = static_cast<int>(to_int(value, qual));
      else if (key == "environment_dims") synth.environment_dims = static_cast<int>(to_int(value, qual));
      else if (key == "samples_per_class") synth.samples_per_class = static_cast<int>(to_int(value, qual));
      else if (key == "sigma_noise") synth.sigma_noise = to_double(value, qual);
      else if (key == "attr_noise") synth.attr_noise = to_double(value, qual);
      else throw ValidationError("unknown config key " + qual + " at " + where);
    } else if (section == "relation") {
      if (key == "lambda") cfg.params.lambda = to_double(value, qual);
      else throw ValidationError("unknown config key " + qual + " at " + where);
    } else if (section == "construct") {
      if (key == "k") cfg.params.k = static_cast<int>(to_int(value, qual));
      else if (key == "auto_k") cfg.params.auto_k = to_bool(value, qual);
      else if (key == "k_max") cfg.params.k_max = static_cast<int>(to_int(value, qual));
      else if (key == "shortlist") cfg.params.shortlist = static_cast<int>(to_int(value, qual));
      else throw ValidationError("unknown config key " + qual + " at " + where);
    } else if (section == "screen") {
      if (key == "keep_fraction") cfg.params.keep_fraction = to_double(value, qual);
      else throw ValidationError("unknown config key " + qual + " at " + where);
    } else if (section == "eval") {
      if (key == "classifier") cfg.params.classifier = classifier_from_string(value);
      else if (key == "ovr_lambda") cfg.params.ovr_lambda = to_double(value, qual);
      else throw ValidationError("unknown config key " + qual + " at " + where);
    } else if (section == "run") {
      if (key == "seed") cfg.seed = static_cast<std::uint64_t>(to_int(value, qual));
      else if (key == "threads") cfg.threads = static_cast<int>(to_int(value, qual));
      else throw ValidationError("unknown config key " + qual + " at " + where);
    } else {
      throw ValidationError("key outside any section at " + where);
    }
  }

  if (have_synth) cfg.synth = synth;
  validate_params(cfg);
  return cfg;
}

std::string ArtifactPaths::constructed_csv(int u) const {
  return (fs::path(constructed_dir) / ("class_" + std::to_string(u) + ".csv")).string();
}
std::string ArtifactPaths::constructed_provenance(int u) const {
  return (fs::path(constructed_dir) / ("class_" + std::to_string(u) + "_provenance.csv")).string();
}
std::string ArtifactPaths::screened_csv(int u) const {
  return (fs::path(screened_dir) / ("class_" + std::to_string(u) + ".csv")).string();
}

ArtifactPaths artifact_paths(const PipelineConfig& cfg) {
  const fs::path out(cfg.output_dir);
  ArtifactPaths a;
  a.features = (out / (cfg.feature_format == FileFormat::csv ? "features.csv" : "features.bin")).string();
  a.attributes_continuous = (out / "attributes_continuous.csv").string();
  a.attributes_binary = (out / "attributes_binary.csv").string();
  a.split = (out / "split.txt").string();
  a.ground_truth_relation = (out / "ground_truth_relation.bin").string();
  a.relation = (out / "relation.bin").string();
  a.degenerate_rows = (out / "degenerate_rows.txt").string();
  a.attribute_models = (out / "attribute_models.json").string();
  a.source_plan = (out / "source_plan.csv").string();
  a.constructed_dir = (out / "constructed").string();
  a.screened_dir = (out / "screened").string();
  a.eval_report = (out / "eval_report.json").string();
  a.compare_report = (out / "compare_report.json").string();
  return a;
}

namespace {

struct ResolvedInputs {
  std::string features, attrs_continuous, attrs_binary, split;
};

ResolvedInputs resolve_inputs(const PipelineConfig& cfg) {
  const ArtifactPaths art = artifact_paths(cfg);
  ResolvedInputs in;
  auto pick = [&](const std::string& configured, const std::string& fallback,
                  const char* what) {
    if (!configured.empty()) return configured;
    if (cfg.synth.has_value()) return fallback;
    throw ValidationError(std::string("paths.") + what +
                          " is required when no [synth] section is configured");
  };
  in.features = pick(cfg.features_path, art.features, "features");
  in.attrs_continuous =
      pick(cfg.attributes_continuous_path, art.attributes_continuous, "attributes_continuous");
  in.attrs_binary = pick(cfg.attributes_binary_path, art.attributes_binary, "attributes_binary");
  in.split = pick(cfg.split_path, art.split, "split");
  return in;
}

struct LoadedInputs {
  Dataset dataset;
  AttributeTable attrs;
  SplitSpec split;
};

LoadedInputs load_inputs(const PipelineConfig& cfg) {
  const ResolvedInputs paths = resolve_inputs(cfg);
  LoadedInputs in;
  in.dataset = load_dataset(paths.features, cfg.feature_format);
  in.attrs = load_attribute_table(paths.attrs_continuous, paths.attrs_binary);
  in.split = load_split(paths.split);
  validate_inputs(in.dataset, in.attrs, in.split);
  return in;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ValidationError("cannot create directory " + dir + ": " + ec.message());
}

}  // namespace

void stage_synth(const PipelineConfig& cfg) {
  if (!cfg.synth.has_value()) {
    throw ValidationError("synth stage requires a [synth] section in the config");
  }
  ensure_dir(cfg.output_dir);
  const ArtifactPaths art = artifact_paths(cfg);

  SynthConfig sc = *cfg.synth;
  sc.seed = cfg.seed;
  std::cerr << "[info] generating synthetic task family (seed " << sc.seed << ")\n";
  const SynthOutput out = generate_synthetic(sc);

  save_dataset(art.features, cfg.feature_format, out.dataset);
  save_attribute_table(art.attributes_continuous, art.attributes_binary, out.attrs);
  save_split(art.split, out.split);
  save_matrix_binary(art.ground_truth_relation, out.ground_truth.R);

  std::cout << "stage=synth seed=" << cfg.seed << " classes=" << out.attrs.num_classes()
            << " seen=" << out.split.seen.size() << " unseen=" << out.split.unseen.size()
            << " samples=" << out.dataset.n() << " features=" << out.dataset.p()
            << " out=" << cfg.output_dir << "\n";
}

void stage_relation(const PipelineConfig& cfg) {
  ensure_dir(cfg.output_dir);
  const ArtifactPaths art = artifact_paths(cfg);
  const LoadedInputs in = load_inputs(cfg);

  std::cerr << "[info] training " << in.attrs.num_attributes()
            << " attribute predictors (lambda " << cfg.params.lambda << ")\n";
  const RelationBuild rb = build_relation_and_models(in.dataset, in.attrs, in.split,
                                                     cfg.params.lambda, cfg.seed, cfg.threads);
  save_relation(rb.relation, art.relation, art.degenerate_rows);
  save_attribute_models(rb.models, art.attribute_models);

  std::cout << "stage=relation seed=" << cfg.seed << " attributes=" << rb.relation.num_attributes()
            << " degenerate=" << rb.relation.degenerate_rows.size()
            << " environment_dims=" << environment_dims(rb.relation).size()
            << " out=" << cfg.output_dir << "\n";
}

void stage_construct(const PipelineConfig& cfg) {
  ensure_dir(cfg.output_dir);
  const ArtifactPaths art = artifact_paths(cfg);
  const LoadedInputs in = load_inputs(cfg);
  const RelationMatrix rel = load_relation(art.relation, art.degenerate_rows);
  const AttributeModels models = load_attribute_models(art.attribute_models);
  if (models.models.size() != in.attrs.num_attributes()) {
    throw ValidationError("attribute model count does not match the attribute table");
  }

  const PairwiseStats stats = pairwise_stats(in.attrs);
  const SourcePlan plan = build_source_plan(in.attrs, stats, in.split, cfg.params.k,
                                            cfg.params.auto_k, cfg.params.k_max);
  save_source_plan(plan, art.source_plan);
  ensure_dir(art.constructed_dir);

  const std::vector<int> unseen(in.split.unseen.begin(), in.split.unseen.end());
  std::vector<ClassConstruction> built(unseen.size());
  parallel_for(unseen.size(), cfg.threads, [&](std::size_t i) {
    built[i] = construct_class_samples(in.dataset, in.attrs, rel, plan, models, unseen[i],
                                       cfg.seed + static_cast<std::uint64_t>(unseen[i]),
                                       cfg.params.shortlist);
  });

  std::size_t total = 0, skipped = 0;
  for (std::size_t i = 0; i < unseen.size(); ++i) {
    save_constructed(built[i].samples, art.constructed_csv(unseen[i]),
                     art.constructed_provenance(unseen[i]));
    total += built[i].samples.size();
    skipped += built[i].skipped_attributes.size();
    for (int a : built[i].skipped_attributes) {
      std::cerr << "[warn] class " << unseen[i] << ": attribute " << a
                << " left unspliced (no seen sample carries the target value)\n";
    }
  }

  std::cout << "stage=construct seed=" << cfg.seed << " classes=" << unseen.size()
            << " samples=" << total << " skipped_attributes=" << skipped
            << " out=" << cfg.output_dir << "\n";
}

void stage_screen(const PipelineConfig& cfg) {
  ensure_dir(cfg.output_dir);
  const ArtifactPaths art = artifact_paths(cfg);
  const LoadedInputs in = load_inputs(cfg);
  ensure_dir(art.screened_dir);

  const auto centroids = class_centroids(in.dataset, in.split.seen);
  std::size_t kept_total = 0, scored_total = 0;
  for (int u : in.split.unseen) {
    const auto constructed =
        load_constructed(art.constructed_csv(u), art.constructed_provenance(u));
    const DissimilarityVector profile = dissimilarity_attribute(in.attrs, in.split, u);
    ScreenResult result =
        screen_samples(constructed, profile, centroids, cfg.params.keep_fraction);
    save_screened(result.kept, art.screened_csv(u));
    kept_total += result.kept.size();
    scored_total += result.scored.size();
  }

  std::cout << "stage=screen seed=" << cfg.seed << " classes=" << in.split.unseen.size()
            << " kept=" << kept_total << " of=" << scored_total << " out=" << cfg.output_dir
            << "\n";
}

namespace {

// Shared by stage_eval / stage_compare: the real unseen-class samples.
void unseen_test_set(const LoadedInputs& in, Matrix* X, std::vector<int>* y) {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < in.dataset.n(); ++i) {
    if (in.split.is_unseen(in.dataset.labels[i])) rows.push_back(i);
  }
  if (rows.empty()) throw DegeneracyError("no real samples of unseen classes to evaluate on");
  *X = Matrix(rows.size(), in.dataset.p());
  y->resize(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto row = in.dataset.features.row(rows[i]);
    std::copy(row.begin(), row.end(), X->row(i).begin());
    (*y)[i] = in.dataset.labels[rows[i]];
  }
}

}  // namespace

void stage_eval(const PipelineConfig& cfg) {
  ensure_dir(cfg.output_dir);
  const ArtifactPaths art = artifact_paths(cfg);
  const LoadedInputs in = load_inputs(cfg);

  Matrix test_X;
  std::vector<int> test_y;
  unseen_test_set(in, &test_X, &test_y);
  const std::vector<int> unseen(in.split.unseen.begin(), in.split.unseen.end());

  std::vector<ConstructedSample> ibsc_train, ibsc_s_train;
  for (int u : unseen) {
    const auto constructed =
        load_constructed(art.constructed_csv(u), art.constructed_provenance(u));
    ibsc_train.insert(ibsc_train.end(), constructed.begin(), constructed.end());
    const auto screened = load_screened(art.screened_csv(u));
    ibsc_s_train.insert(ibsc_s_train.end(), screened.begin(), screened.end());
  }

  EvalReport report;
  report.params = cfg.params;
  report.seed = cfg.seed;
  report.strategies.emplace_back(
      "IBSC", evaluate_constructed(ibsc_train, unseen, test_X, test_y, cfg.params));
  report.strategies.emplace_back(
      "IBSC_S", evaluate_constructed(ibsc_s_train, unseen, test_X, test_y, cfg.params));
  save_eval_report(report, art.eval_report);

  std::cout << "stage=eval seed=" << cfg.seed << " ibsc_top1="
            << format_double(report.strategies[0].second.top1)
            << " ibsc_s_top1=" << format_double(report.strategies[1].second.top1)
            << " out=" << cfg.output_dir << "\n";
}

void stage_compare(const PipelineConfig& cfg) {
  ensure_dir(cfg.output_dir);
  const ArtifactPaths art = artifact_paths(cfg);
  const LoadedInputs in = load_inputs(cfg);

  std::cerr << "[info] comparing strategies on " << in.split.unseen.size()
            << " unseen classes\n";
  const EvalReport report =
      compare_strategies(in.dataset, in.attrs, in.split, cfg.params, cfg.seed, cfg.threads);
  save_eval_report(report, art.compare_report);

  std::cout << "stage=compare seed=" << cfg.seed;
  for (const auto& [name, result] : report.strategies) {
    std::string key = name;
    for (char& ch : key) ch = static_cast<char>(std::tolower(ch));
    std::cout << " " << key << "=" << format_double(result.top1);
  }
  std::cout << " out=" << cfg.output_dir << "\n";
}

void run_pipeline(const PipelineConfig& cfg) {
  if (cfg.synth.has_value()) stage_synth(cfg);
  stage_relation(cfg);
  stage_construct(cfg);
  stage_screen(cfg);
  stage_eval(cfg);
  stage_compare(cfg);
}

}  // namespace ibsc
