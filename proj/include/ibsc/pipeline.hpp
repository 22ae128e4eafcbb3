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
#include <optional>
#include <string>

#include "ibsc/params.hpp"
#include "ibsc/synthgen.hpp"

namespace ibsc {

// Parsed configuration file: flat "key = value" entries under [section]
// headers.  Unknown sections or keys are rejected.  Sections: [paths],
// [synth], [relation], [construct], [screen], [eval], [run].
struct PipelineConfig {
  // [paths]; any input left empty resolves to the synth artifact written in
  // output_dir (only valid when a [synth] section is present).
  std::string features_path;
  std::string attributes_continuous_path;
  std::string attributes_binary_path;
  std::string split_path;
  std::string output_dir = "out";
  FileFormat feature_format = FileFormat::csv;

  std::optional<SynthConfig> synth;  // present iff the file has a [synth] section

  RunParams params;

  std::uint64_t seed = 0;
  int threads = 0;  // 0 = hardware concurrency
};

PipelineConfig load_config(const std::string& path);

// Stage drivers.  Each one reads only input files and on-disk artifacts of
// earlier stages, writes its artifacts under output_dir, and prints a single
// machine-parsable summary line to stdout.
void stage_synth(const PipelineConfig& cfg);
void stage_relation(const PipelineConfig& cfg);
void stage_construct(const PipelineConfig& cfg);
void stage_screen(const PipelineConfig& cfg);
void stage_eval(const PipelineConfig& cfg);
void stage_compare(const PipelineConfig& cfg);

// All stages in order (synth only when configured); equivalent to invoking
// the stages one at a time because every hand-off goes through the disk.
void run_pipeline(const PipelineConfig& cfg);

// Artifact locations under output_dir.
struct ArtifactPaths {
  std::string features, attributes_continuous, attributes_binary, split;
  std::string ground_truth_relation;
  std::string relation, degenerate_rows, attribute_models;
  std::string source_plan;
  std::string constructed_dir, screened_dir;
  std::string eval_report, compare_report;

  std::string constructed_csv(int u) const;
  std::string constructed_provenance(int u) const;
  std::string screened_csv(int u) const;
};
ArtifactPaths artifact_paths(const PipelineConfig& cfg);

}  // namespace ibsc
