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

#include "playseg/pipeline.h"

#include <chrono>
#include <cstdlib>

#include "playseg/error.h"
#include "playseg/fusion.h"

namespace playseg {

namespace {

class StageTimer {
 public:
  explicit StageTimer(std::map<std::string, double>* out) : out_(out) {}
  void Mark(const std::string& stage) {
    const auto now = std::chrono::steady_clock::now();
    (*out_)[stage] = std::chrono::duration<double, std::milli>(now - last_).count();
    last_ = now;
  }

 private:
  std::map<std::string, double>* out_;
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

}  // namespace

HeuristicWeights EffectiveWeights(const KeystateConfig& config,
                                  const std::set<Heuristic>& available) {
  if (available.empty()) throw ValidationError("keystates.heuristics", "no enabled heuristic has input signals");
  if (config.weights.empty()) return EqualWeights(available);
  HeuristicWeights out;
  double sum = 0.0;
  for (const auto& [h, w] : config.weights) {
    if (available.count(h) == 0) continue;
    out[h] = w;
    sum += w;
  }
  if (sum <= 0.0) throw ValidationError("keystates.weights", "no weight left on an available heuristic");
  for (auto& [h, w] : out) w /= sum;
  return out;
}

PipelineResult RunPipeline(const Episode& ep, const Config& config, LabelClient& client,
                           const PipelineOptions& options) {
  PipelineResult r;
  StageTimer timer(&r.timings_ms);
  r.registry = AssignProperties(BuildRegistry(ep, config.registry), client);
  timer.Mark("registry");
  const std::vector<ObjectTrack> tracks = BuildTracks(ep, r.registry, config.fusion);
  timer.Mark("fusion");
  r.signals = ComputeSignals(ep, r.registry, tracks, config.signals);
  timer.Mark("signals");
  r.observations = EmitObservations(r.signals, r.registry, config.observations);
  timer.Mark("observations");

  CandidateOptions cand;
  cand.graded_movement = config.keystates.graded_movement;
  const auto candidates = CollectCandidates(r.signals, cand);
  r.weights = EffectiveWeights(config.keystates, AvailableHeuristics(r.signals, config.keystates.enabled));
  r.keystates = Aggregate(Threshold(ScoreCandidates(candidates, r.weights, config.keystates.window),
                                    config.keystates.theta),
                          config.keystates.window);
  timer.Mark("keystates");
  if (!options.skip_labels) {
    const int64_t first = ep.frames.empty() ? 0 : ep.frames.front().frame_index;
    r.labels = LabelEpisode(r.observations, r.keystates, first, client, config.labeler.options,
                            config.labeler.max_in_flight);
    timer.Mark("labels");
  }
  return r;
}

std::unique_ptr<LabelClient> MakeClient(const ClientConfig& config, const std::optional<Script>& script) {
  if (config.mode == "mock") {
    if (!script) throw ClientError("mock client needs the episode script");
    return std::make_unique<ScriptedMockClient>(*script);
  }
  HttpClientOptions http = ToHttpOptions(config);
  if (const char* key = std::getenv(kApiKeyEnv)) http.api_key = key;
  return std::make_unique<HttpLabelClient>(http);
}

}  // namespace playseg
