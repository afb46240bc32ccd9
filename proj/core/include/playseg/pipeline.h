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

#ifndef PLAYSEG_PIPELINE_H_
#define PLAYSEG_PIPELINE_H_

#include <map>
#include <memory>
#include <optional>
#include <string>

#include "playseg/config.h"
#include "playseg/keystates.h"
#include "playseg/label_client.h"
#include "playseg/labeler.h"
#include "playseg/observations.h"
#include "playseg/registry.h"
#include "playseg/signals.h"
#include "playseg/stream.h"
#include "playseg/synth.h"

namespace playseg {

struct PipelineResult {
  ObjectRegistry registry;
  EpisodeSignals signals;
  ObservationLog observations;
  // Weights after renormalization over the available heuristics.
  HeuristicWeights weights;
  std::vector<Keystate> keystates;
  EpisodeLabels labels;
  // Wall time per stage in milliseconds.
  std::map<std::string, double> timings_ms;
};

struct PipelineOptions {
  // Stop after keystates; the client is then used only for properties.
  bool skip_labels = false;
};

// Configured weights restricted to `available` and rescaled to sum to 1;
// equal weights over `available` when none are configured. Throws
// ValidationError when nothing usable remains.
HeuristicWeights EffectiveWeights(const KeystateConfig& config,
                                  const std::set<Heuristic>& available);

// Registry, properties, tracks, signals, observations, keystates and labels
// for one episode.
PipelineResult RunPipeline(const Episode& ep, const Config& config,
                           LabelClient& client,
                           const PipelineOptions& options = {});

// Mock mode needs the episode's script; http mode ignores it.
std::unique_ptr<LabelClient> MakeClient(const ClientConfig& config,
                                        const std::optional<Script>& script);

}  // namespace playseg

#endif  // PLAYSEG_PIPELINE_H_
