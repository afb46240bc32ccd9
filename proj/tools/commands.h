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

#ifndef PLAYSEG_TOOLS_COMMANDS_H_
#define PLAYSEG_TOOLS_COMMANDS_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "playseg/synth.h"

namespace playseg::cli {

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  // episode, input or data error
inline constexpr int kExitConfig = 2;   // invalid configuration or usage

inline constexpr char kManifestFile[] = "manifest.json";
inline constexpr char kTimingFile[] = "timing.json";

// Config file plus "section.key=value" overrides, applied in order.
struct ConfigSource {
  std::optional<std::filesystem::path> file;
  std::vector<std::string> overrides;
};

struct LabelArgs {
  std::filesystem::path episode_dir;
  std::filesystem::path out_dir;
  ConfigSource config;
};

// Runs every "*.episode.jsonl" under episode_dir. Writes the registry,
// observation, keystate and label artifacts per episode, plus manifest.json
// (byte-deterministic) and timing.json. Mock mode reads "<id>.script.jsonl"
// next to each episode.
int RunLabel(const LabelArgs& args, std::ostream& out, std::ostream& err);

struct EvalKeystatesArgs {
  std::filesystem::path pred_dir;
  std::filesystem::path gt_dir;
  ConfigSource config;
  std::optional<std::filesystem::path> report;
};

int RunEvalKeystates(const EvalKeystatesArgs& args, std::ostream& out, std::ostream& err);

struct EvalGroundingArgs {
  std::filesystem::path labels_dir;
  std::filesystem::path gt_dir;
  ConfigSource config;
  std::optional<std::filesystem::path> report;
};

int RunEvalGrounding(const EvalGroundingArgs& args, std::ostream& out, std::ostream& err);

struct SynthArgs {
  // Either a script file or a seed range for random scripts.
  std::optional<std::filesystem::path> script;
  uint64_t seed = 0;
  int count = 1;
  RandomScriptOptions random;
  std::filesystem::path out_dir;
};

// Writes "<id>.episode.jsonl" with its sidecars, "<id>.script.jsonl" and
// "<id>.truth.jsonl" per episode.
int RunSynth(const SynthArgs& args, std::ostream& out, std::ostream& err);

int RunInspect(const std::filesystem::path& path, std::ostream& out, std::ostream& err);

}  // namespace playseg::cli

#endif  // PLAYSEG_TOOLS_COMMANDS_H_
