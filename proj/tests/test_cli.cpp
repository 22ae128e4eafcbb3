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

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "test_util.hpp"

using test_util::TempDir;
using test_util::read_bytes;
using test_util::write_text;

namespace {

struct CliResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

CliResult run_cli(const TempDir& tmp, const std::string& tag, const std::string& args) {
  const std::string out_path = tmp.file("stdout_" + tag + ".txt");
  const std::string err_path = tmp.file("stderr_" + tag + ".txt");
  const std::string cmd = std::string("\"") + IBSC_CLI_PATH + "\" " + args + " > \"" + out_path +
                          "\" 2> \"" + err_path + "\"";
  const int status = std::system(cmd.c_str());
  CliResult r;
  REQUIRE(status != -1);
  REQUIRE(WIFEXITED(status));
  r.exit_code = WEXITSTATUS(status);
  r.out = read_bytes(out_path);
  r.err = read_bytes(err_path);
  return r;
}

std::string synth_config(int seed) {
  return "[synth]\n"
         "seen_classes = 8\n"
         "unseen_classes = 2\n"
         "attributes = 6\n"
         "block_width = 3\n"
         "environment_dims = 10\n"
         "samples_per_class = 12\n"
         "sigma_noise = 0.3\n"
         "attr_noise = 0.05\n"
         "\n"
         "[construct]\n"
         "k = 5\n"
         "\n"
         "[run]\n"
         "seed = " + std::to_string(seed) + "\n"
         "threads = 2\n";
}

bool contains(const std::string& haystack, const std::string& needle) {
  return haystack.find(needle) != std::string::npos;
}

std::size_t line_count(const std::string& s) {
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

}  // namespace

TEST_CASE("argument errors exit 1 with a one-line cli error") {
  TempDir tmp;
  const CliResult none = run_cli(tmp, "none", "");
  CHECK(none.exit_code == 1);
  CHECK(contains(none.err, "error[cli]:"));
  CHECK(line_count(none.err) == 1);

  const CliResult flag = run_cli(tmp, "flag", "relation --config x.ini --no-such-flag");
  CHECK(flag.exit_code == 1);
  CHECK(contains(flag.err, "error[cli]:"));

  const CliResult noconf = run_cli(tmp, "noconf", "relation");
  CHECK(noconf.exit_code == 1);
}

TEST_CASE("config problems exit 1 with a one-line validation error") {
  TempDir tmp;
  const CliResult missing =
      run_cli(tmp, "missing", "relation --config \"" + tmp.file("nope.ini") + "\"");
  CHECK(missing.exit_code == 1);
  CHECK(contains(missing.err, "error[validation]:"));
  CHECK(contains(missing.err, "cannot open config"));
  CHECK(line_count(missing.err) == 1);

  write_text(tmp.file("bad.ini"), "[synth]\nseen_classes = 8\nwidgets = 3\n");
  const CliResult unknown =
      run_cli(tmp, "unknown", "relation --config \"" + tmp.file("bad.ini") + "\"");
  CHECK(unknown.exit_code == 1);
  CHECK(contains(unknown.err, "unknown config key synth.widgets"));

  write_text(tmp.file("nosec.ini"), "seen_classes = 8\n");
  const CliResult nosec =
      run_cli(tmp, "nosec", "relation --config \"" + tmp.file("nosec.ini") + "\"");
  CHECK(nosec.exit_code == 1);
  CHECK(contains(nosec.err, "error[validation]:"));

  // Without a [synth] section every input path must be configured.
  write_text(tmp.file("nopath.ini"), "[run]\nseed = 1\n");
  const CliResult nopath =
      run_cli(tmp, "nopath", "relation --config \"" + tmp.file("nopath.ini") + "\"");
  CHECK(nopath.exit_code == 1);
  CHECK(contains(nopath.err, "paths.features is required"));
}

TEST_CASE("flag overrides are validated like config values") {
  TempDir tmp;
  write_text(tmp.file("cfg.ini"), synth_config(7));
  const std::string base = "pipeline --config \"" + tmp.file("cfg.ini") + "\"";
  CHECK(run_cli(tmp, "keep", base + " --keep-fraction 1.5").exit_code == 1);
  CHECK(run_cli(tmp, "k", base + " --k 0").exit_code == 1);
  CHECK(run_cli(tmp, "clf", base + " --classifier kmeans").exit_code == 1);
  CHECK(run_cli(tmp, "thr", base + " --threads -1").exit_code == 1);
}

TEST_CASE("degenerate inputs exit 2 with a degeneracy error") {
  // Three classes whose attribute vectors coincide: the pairwise distance
  // scale collapses once construction starts.
  TempDir tmp;
  write_text(tmp.file("features.csv"),
             "id,label,f0,f1\n"
             "0,0,1.0,2.0\n"
             "1,0,1.5,2.5\n"
             "2,1,5.0,6.0\n"
             "3,1,5.5,6.5\n"
             "4,2,9.0,9.0\n"
             "5,2,9.5,9.5\n");
  write_text(tmp.file("attrs_c.csv"), "class,a0,a1\n0,0.5,0.5\n1,0.5,0.5\n2,0.5,0.5\n");
  write_text(tmp.file("attrs_b.csv"), "class,a0,a1\n0,1,0\n1,1,0\n2,1,0\n");
  write_text(tmp.file("split.txt"), "seen: 0,1\nunseen: 2\n");
  write_text(tmp.file("cfg.ini"),
             "[paths]\n"
             "features = " + tmp.file("features.csv") + "\n"
             "attributes_continuous = " + tmp.file("attrs_c.csv") + "\n"
             "attributes_binary = " + tmp.file("attrs_b.csv") + "\n"
             "split = " + tmp.file("split.txt") + "\n"
             "output_dir = " + tmp.file("out") + "\n"
             "\n[construct]\nk = 1\n");
  const CliResult r = run_cli(tmp, "degen", "pipeline --config \"" + tmp.file("cfg.ini") + "\"");
  CHECK(r.exit_code == 2);
  CHECK(contains(r.err, "error[degeneracy]:"));
}

TEST_CASE("stage summaries go to stdout and reruns are byte-identical") {
  TempDir tmp;
  write_text(tmp.file("cfg.ini"), synth_config(5));
  const std::string out_dir = tmp.file("out");
  const std::string base = "--config \"" + tmp.file("cfg.ini") + "\" --out \"" + out_dir + "\"";

  const CliResult synth = run_cli(tmp, "synth", "synth " + base);
  REQUIRE(synth.exit_code == 0);
  CHECK(contains(synth.out, "stage=synth seed=5"));
  CHECK(contains(synth.out, "classes=10"));
  CHECK(line_count(synth.out) == 1);

  const CliResult rel1 = run_cli(tmp, "rel1", "relation " + base);
  REQUIRE(rel1.exit_code == 0);
  CHECK(rel1.out.rfind("stage=relation ", 0) == 0);
  CHECK(contains(rel1.out, "attributes=6"));
  CHECK(contains(rel1.err, "[info]"));
  const std::string first = read_bytes(out_dir + "/relation.bin");

  const CliResult rel2 = run_cli(tmp, "rel2", "relation " + base);
  REQUIRE(rel2.exit_code == 0);
  CHECK(read_bytes(out_dir + "/relation.bin") == first);
}

TEST_CASE("the pipeline command matches running each stage in order") {
  TempDir tmp;
  write_text(tmp.file("cfg.ini"), synth_config(7));
  const std::string dir_a = tmp.file("a");
  const std::string dir_b = tmp.file("b");
  const std::string cfg = "--config \"" + tmp.file("cfg.ini") + "\"";

  const CliResult pipe = run_cli(tmp, "pipe", "pipeline " + cfg + " --out \"" + dir_a + "\"");
  REQUIRE(pipe.exit_code == 0);
  for (const char* stage : {"stage=synth", "stage=relation", "stage=construct", "stage=screen",
                            "stage=eval", "stage=compare"}) {
    CHECK(contains(pipe.out, stage));
  }

  for (const char* stage : {"synth", "relation", "construct", "screen", "eval", "compare"}) {
    const CliResult r = run_cli(tmp, std::string("stage_") + stage,
                                std::string(stage) + " " + cfg + " --out \"" + dir_b + "\"");
    REQUIRE(r.exit_code == 0);
  }

  for (const char* artifact :
       {"/relation.bin", "/degenerate_rows.txt", "/attribute_models.json", "/source_plan.csv",
        "/constructed/class_8.csv", "/constructed/class_8_provenance.csv",
        "/constructed/class_9.csv", "/screened/class_8.csv", "/screened/class_9.csv",
        "/eval_report.json", "/compare_report.json"}) {
    REQUIRE(std::filesystem::exists(dir_a + artifact));
    REQUIRE(std::filesystem::exists(dir_b + artifact));
    CHECK(read_bytes(dir_a + artifact) == read_bytes(dir_b + artifact));
  }
}

TEST_CASE("the seed flag overrides the config seed end to end") {
  TempDir tmp;
  write_text(tmp.file("cfg.ini"), synth_config(7));
  const std::string out_dir = tmp.file("out");
  const CliResult r = run_cli(tmp, "seed9", "pipeline --config \"" + tmp.file("cfg.ini") +
                                                "\" --out \"" + out_dir + "\" --seed 9");
  REQUIRE(r.exit_code == 0);
  CHECK(contains(r.out, "stage=synth seed=9"));
  const auto report = nlohmann::json::parse(read_bytes(out_dir + "/eval_report.json"));
  CHECK(report.at("seed").get<int>() == 9);
  const auto compare = nlohmann::json::parse(read_bytes(out_dir + "/compare_report.json"));
  CHECK(compare.at("seed").get<int>() == 9);
}
