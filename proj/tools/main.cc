/* Copyright 2026 The Playseg Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// playseg: keystate detection and language labeling for long robot episodes.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "commands.h"
#include "playseg/text.h"

namespace {

namespace cli = playseg::cli;

// Options shared by every config-driven subcommand. Dedicated flags become
// overrides after --set, so they win over both.
struct CommonFlags {
  std::string config_file;
  std::vector<std::string> sets;
  std::vector<std::string> flag_sets;

  void Attach(CLI::App* app) {
    app->add_option("-c,--config", config_file, "JSON config file with nested sections")
        ->check(CLI::ExistingFile);
    app->add_option("--set", sets, "Override one value, e.g. keystates.theta=0.3")
        ->allow_extra_args(false);
  }

  // Registers a flag that maps onto a config key.
  template <typename T>
  void Bind(CLI::App* app, const std::string& name, const std::string& key, const std::string& help) {
    app->add_option_function<T>(
        name,
        [this, key](const T& v) {
          if constexpr (std::is_same_v<T, std::string>) {
            flag_sets.push_back(key + "=\"" + v + "\"");
          } else if constexpr (std::is_same_v<T, std::vector<int64_t>>) {
            std::vector<std::string> parts;
            for (int64_t e : v) parts.push_back(std::to_string(e));
            flag_sets.push_back(key + "=[" + playseg::Join(parts, ",") + "]");
          } else {
            flag_sets.push_back(key + "=" + std::to_string(v));
          }
        },
        help);
  }

  cli::ConfigSource Source() const {
    cli::ConfigSource s;
    if (!config_file.empty()) s.file = config_file;
    s.overrides = sets;
    s.overrides.insert(s.overrides.end(), flag_sets.begin(), flag_sets.end());
    return s;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Keystate detection and language labeling for long robot episodes"};
  app.require_subcommand(1);
  app.set_version_flag("--version", PLAYSEG_VERSION);

  // label
  CommonFlags label_flags;
  cli::LabelArgs label;
  CLI::App* label_cmd = app.add_subcommand("label", "Detect keystates and label every episode in a directory");
  label_cmd->add_option("episodes", label.episode_dir, "Directory of *.episode.jsonl files")->required();
  label_cmd->add_option("-o,--out", label.out_dir, "Output directory")->required();
  label_flags.Attach(label_cmd);
  label_flags.Bind<int>(label_cmd, "-j,--workers", "run.workers", "Episodes processed in parallel");
  label_flags.Bind<double>(label_cmd, "--theta", "keystates.theta", "Keystate score threshold");
  label_flags.Bind<int>(label_cmd, "--window", "keystates.window", "Merge window in frames");
  label_flags.Bind<double>(label_cmd, "--min-conf", "labeler.min_conf", "Minimum label confidence (0-10)");
  label_flags.Bind<int>(label_cmd, "--max-in-flight", "labeler.max_in_flight", "Concurrent model requests");
  label_flags.Bind<std::string>(label_cmd, "--client", "client.mode", "mock or http");
  label_flags.Bind<std::string>(label_cmd, "--endpoint", "client.endpoint", "Chat completions URL");
  label_flags.Bind<std::string>(label_cmd, "--model", "client.model", "Model name sent to the endpoint");

  // eval-keystates
  CommonFlags ek_flags;
  cli::EvalKeystatesArgs ek;
  std::string ek_report;
  CLI::App* ek_cmd = app.add_subcommand("eval-keystates", "Precision, recall and mAP of predicted keystates");
  ek_cmd->add_option("pred", ek.pred_dir, "Directory of *.keystates.jsonl")->required();
  ek_cmd->add_option("gt", ek.gt_dir, "Directory of *.truth.jsonl")->required();
  ek_cmd->add_option("--report", ek_report, "Also write the report here");
  ek_flags.Attach(ek_cmd);
  ek_flags.Bind<std::vector<int64_t>>(ek_cmd, "-e,--epsilon", "eval.tolerances", "Frame tolerances");
  ek_flags.Bind<double>(ek_cmd, "--task-length-factor", "eval.task_length_factor",
                        "Add a tolerance of factor x mean task length");

  // eval-grounding
  CommonFlags eg_flags;
  cli::EvalGroundingArgs eg;
  std::string eg_report;
  CLI::App* eg_cmd = app.add_subcommand("eval-grounding", "Grounding accuracy of segment labels");
  eg_cmd->add_option("labels", eg.labels_dir, "Directory of *.labels.jsonl")->required();
  eg_cmd->add_option("gt", eg.gt_dir, "Directory of *.truth.jsonl")->required();
  eg_cmd->add_option("--report", eg_report, "Also write the report here");
  eg_flags.Attach(eg_cmd);
  eg_flags.Bind<std::string>(eg_cmd, "-m,--mode", "eval.grounding_mode", "amb or single");
  eg_flags.Bind<int64_t>(eg_cmd, "-e,--epsilon", "eval.grounding_epsilon", "Keystate tolerance for alignment");

  // synth
  cli::SynthArgs synth;
  std::string script_file;
  CLI::App* synth_cmd = app.add_subcommand("synth", "Render scripted or random synthetic episodes");
  synth_cmd->add_option("-o,--out", synth.out_dir, "Output directory")->required();
  auto* script_opt = synth_cmd->add_option("--script", script_file, "Script file (*.script.jsonl)")
                         ->check(CLI::ExistingFile);
  synth_cmd->add_option("--seed", synth.seed, "First random seed")->excludes(script_opt);
  synth_cmd->add_option("--count", synth.count, "Number of random episodes")->excludes(script_opt);
  synth_cmd->add_option("--tasks", synth.random.num_tasks, "Tasks per random episode")->excludes(script_opt);
  synth_cmd->add_option("--objects", synth.random.num_objects, "Movable objects")->excludes(script_opt);
  synth_cmd->add_flag("!--no-drawer", synth.random.with_drawer, "Leave out the drawer")->excludes(script_opt);
  synth_cmd->add_option("--jitter", synth.random.noise.box_sigma, "Box jitter sigma in pixels");
  synth_cmd->add_option("--dropout", synth.random.noise.dropout, "Per-frame detection dropout");
  synth_cmd->add_option("--spurious", synth.random.noise.spurious_rate, "Spurious detection rate");
  synth_cmd->add_option("--synonyms", synth.random.noise.synonym_rate, "Synonym name rate");

  // inspect
  std::string inspect_path;
  CLI::App* inspect_cmd = app.add_subcommand("inspect", "Pretty-print an artifact, episode or script file");
  inspect_cmd->add_option("file", inspect_path, "File to print")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? cli::kExitOk : cli::kExitConfig;
  }

  if (*label_cmd) {
    label.config = label_flags.Source();
    return cli::RunLabel(label, std::cout, std::cerr);
  }
  if (*ek_cmd) {
    ek.config = ek_flags.Source();
    if (!ek_report.empty()) ek.report = ek_report;
    return cli::RunEvalKeystates(ek, std::cout, std::cerr);
  }
  if (*eg_cmd) {
    eg.config = eg_flags.Source();
    if (!eg_report.empty()) eg.report = eg_report;
    return cli::RunEvalGrounding(eg, std::cout, std::cerr);
  }
  if (*synth_cmd) {
    if (!script_file.empty()) synth.script = script_file;
    return cli::RunSynth(synth, std::cout, std::cerr);
  }
  return cli::RunInspect(inspect_path, std::cout, std::cerr);
}
