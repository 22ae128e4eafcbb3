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

#include <functional>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ibsc/errors.hpp"
#include "ibsc/eval.hpp"
#include "ibsc/pipeline.hpp"

namespace {

// Flag values shared by every subcommand; optional so that only flags the
// user actually passed override the config file.
struct CliOverrides {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<std::string> out;
  std::optional<double> keep_fraction;
  std::optional<int> k;
  std::optional<std::string> classifier;
};

void add_common_options(CLI::App* cmd, CliOverrides* o) {
  cmd->add_option("--config", o->config_path, "configuration file")->required();
  cmd->add_option("--seed", o->seed, "override run.seed");
  cmd->add_option("--threads", o->threads, "override run.threads (0 = all cores)");
  cmd->add_option("--out", o->out, "override paths.output_dir");
  cmd->add_option("--keep-fraction", o->keep_fraction, "override screen.keep_fraction");
  cmd->add_option("--k", o->k, "override construct.k");
  cmd->add_option("--classifier", o->classifier,
                  "override eval.classifier (nearest_centroid | linear_ovr)");
}

ibsc::PipelineConfig make_config(const CliOverrides& o) {
  ibsc::PipelineConfig cfg = ibsc::load_config(o.config_path);
  if (o.seed) cfg.seed = *o.seed;
  if (o.threads) cfg.threads = *o.threads;
  if (o.out) cfg.output_dir = *o.out;
  if (o.keep_fraction) cfg.params.keep_fraction = *o.keep_fraction;
  if (o.k) cfg.params.k = *o.k;
  if (o.classifier) cfg.params.classifier = ibsc::classifier_from_string(*o.classifier);
  if (cfg.threads < 0) throw ibsc::ValidationError("threads must be >= 0");
  if (!(cfg.params.keep_fraction > 0 && cfg.params.keep_fraction <= 1)) {
    throw ibsc::ValidationError("keep_fraction must be in (0, 1]");
  }
  if (cfg.params.k < 1) throw ibsc::ValidationError("k must be >= 1");
  return cfg;
}

std::string one_line(const char* what) {
  std::string msg(what);
  for (char& ch : msg) {
    if (ch == '\n' || ch == '\r') ch = ' ';
  }
  return msg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "ibsc: construct, screen and evaluate training samples for unseen classes\n"
      "by splicing attribute-relevant feature dims from similar seen classes"};
  app.require_subcommand(1);

  CliOverrides overrides;
  std::function<void(const ibsc::PipelineConfig&)> action;

  struct StageSpec {
    const char* name;
    const char* help;
    void (*fn)(const ibsc::PipelineConfig&);
  };
  const StageSpec stages[] = {
      {"synth", "generate the synthetic task family configured in [synth]", ibsc::stage_synth},
      {"relation", "train sparse attribute predictors and emit the relation matrix",
       ibsc::stage_relation},
      {"construct", "plan sources and splice samples for every unseen class",
       ibsc::stage_construct},
      {"screen", "score constructed samples against the attribute profile and keep the best",
       ibsc::stage_screen},
      {"eval", "train on constructed/screened samples and score real unseen samples",
       ibsc::stage_eval},
      {"compare", "run the five construction strategies end to end and report accuracies",
       ibsc::stage_compare},
      {"pipeline", "run every stage in order through the on-disk artifacts",
       ibsc::run_pipeline},
  };
  for (const auto& stage : stages) {
    CLI::App* cmd = app.add_subcommand(stage.name, stage.help);
    add_common_options(cmd, &overrides);
    cmd->callback([&action, fn = stage.fn] { action = fn; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::cerr << "error[cli]: " << one_line(e.what()) << "\n";
    return 1;
  }

  try {
    action(make_config(overrides));
  } catch (const ibsc::ValidationError& e) {
    std::cerr << "error[validation]: " << one_line(e.what()) << "\n";
    return 1;
  } catch (const ibsc::DegeneracyError& e) {
    std::cerr << "error[degeneracy]: " << one_line(e.what()) << "\n";
    return 2;
  } catch (const ibsc::NumericError& e) {
    std::cerr << "error[numeric]: " << one_line(e.what()) << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error[internal]: " << one_line(e.what()) << "\n";
    return 1;
  }
  return 0;
}
