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

#ifndef PLAYSEG_TESTS_SUPPORT_SUITES_H_
#define PLAYSEG_TESTS_SUPPORT_SUITES_H_

// Randomized oracle suites and synthetic batch runners shared by the unit
// tests and the acceptance binary.

#include <cstdint>
#include <string>
#include <vector>

#include "playseg/config.h"
#include "playseg/evaluator.h"
#include "playseg/keystates.h"
#include "playseg/pipeline.h"
#include "playseg/synth.h"

namespace playseg::testing {

struct OracleTally {
  std::string op;
  size_t instances = 0;
  size_t mismatches = 0;  // discrete disagreements
  double max_error = 0.0;  // continuous disagreement
};

struct NumericsSuiteResult {
  std::vector<OracleTally> ops;
  double seconds = 0.0;
  size_t MinInstances() const;
  size_t TotalMismatches() const;
  double MaxError() const;
};

// Every numerics operation against its brute-force oracle on
// `instances_per_op` random instances.
NumericsSuiteResult RunNumericsSuite(uint64_t seed, int instances_per_op);

struct Eq1SuiteResult {
  size_t instances = 0;
  size_t keystates_checked = 0;
  double max_error = 0.0;
  size_t missing = 0;  // expected keystates not produced, or extra ones
  size_t theta_pairs = 0;
  size_t violations = 0;
  double seconds = 0.0;
};

// Random firings with K in 1..5 scored by ScoreCandidates against a hand
// sum; then random theta pairs checked for set inclusion after Threshold
// and after Threshold + Aggregate.
Eq1SuiteResult RunEq1Suite(uint64_t seed, int instances, int theta_pairs);

// One synthetic episode through the pipeline, keeping what rescoring
// needs.
struct EpisodeRun {
  Script script;
  GroundTruth truth;
  PipelineResult result;
  std::vector<KeystateCandidate> candidates;
};

RandomScriptOptions NoiseFreeOptions();
// Jitter 3 px, dropout 0.1, spurious detections at rate 0.1.
RandomScriptOptions NoisyOptions();

EpisodeRun RunSynthEpisode(uint64_t seed, const RandomScriptOptions& options, const Config& config,
                           bool with_labels);

// Keystates of a finished run under another keystate configuration.
std::vector<Keystate> Rescore(const EpisodeRun& run, const KeystateConfig& config);

struct BatchScore {
  size_t tp = 0, fp = 0, fn = 0;
  double precision = 0.0;  // micro
  double recall = 0.0;     // micro
  double mean_precision = 0.0;  // mean over episodes
  double mean_recall = 0.0;
  std::vector<std::vector<Keystate>> keystates;
};

BatchScore ScoreBatch(const std::vector<EpisodeRun>& runs, const KeystateConfig& config, int64_t epsilon);

// Grounding of the labels each run produced, against its truth.
GroundingReport GroundBatch(const std::vector<EpisodeRun>& runs, GroundingMode mode, int64_t epsilon);

}  // namespace playseg::testing

#endif  // PLAYSEG_TESTS_SUPPORT_SUITES_H_
