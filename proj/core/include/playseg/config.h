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

#ifndef PLAYSEG_CONFIG_H_
#define PLAYSEG_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "playseg/fusion.h"
#include "playseg/keystates.h"
#include "playseg/label_client.h"
#include "playseg/labeler.h"
#include "playseg/observations.h"
#include "playseg/registry.h"
#include "playseg/signals.h"

namespace playseg {

struct KeystateConfig {
  std::set<Heuristic> enabled{std::begin(kAllHeuristics), std::end(kAllHeuristics)};
  // Explicit weights over `enabled`; empty means equal weights renormalized
  // over the heuristics whose signals an episode carries.
  HeuristicWeights weights;
  double theta = 0.25;
  int window = 8;
  bool graded_movement = false;
};

struct LabelerConfig {
  LabelOptions options;
  int max_in_flight = 1;
};

struct EvalConfig {
  std::vector<int64_t> tolerances{8, 16};
  // When set, one extra tolerance round(f * mean task length) is derived
  // from the ground truth.
  std::optional<double> task_length_factor;
  std::string grounding_mode = "amb";
  int64_t grounding_epsilon = 8;
};

struct ClientConfig {
  // "mock" (script-driven, offline) or "http".
  std::string mode = "mock";
  std::string endpoint;
  std::string model = "default";
  int64_t timeout_ms = 60000;
  int attempts = 3;
  int64_t backoff_ms = 250;
};

struct RunConfig {
  int workers = 1;
};

struct Config {
  RegistryOptions registry;
  FusionOptions fusion;
  SignalOptions signals;
  ObservationOptions observations;
  KeystateConfig keystates;
  LabelerConfig labeler;
  EvalConfig eval;
  ClientConfig client;
  RunConfig run;
};

// Every effective value, nested by section, in a fixed key order.
std::string ConfigToJson(const Config& config, int indent = 2);

// Overlays `json_text` on the defaults. Unknown keys and type mismatches
// throw ValidationError whose field() is the dotted key path; range
// violations likewise.
Config ConfigFromJson(const std::string& json_text);

// "section.key=value" assignments applied after the file; the value is
// read as JSON, falling back to a bare string. Same errors as above.
Config LoadConfig(const std::optional<std::filesystem::path>& path,
                  const std::vector<std::string>& overrides = {});

void ValidateConfig(const Config& config);

// SHA-256 of the compact canonical JSON.
std::string ConfigHash(const Config& config);

HttpClientOptions ToHttpOptions(const ClientConfig& client);

}  // namespace playseg

#endif  // PLAYSEG_CONFIG_H_
