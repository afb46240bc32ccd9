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

#ifndef PLAYSEG_KEYSTATES_H_
#define PLAYSEG_KEYSTATES_H_

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string_view>
#include <vector>

#include "playseg/signals.h"

namespace playseg {

enum class Heuristic {
  kGripperClose,
  kGripperNear,
  kObjectMovement,
  kRelationChange,
  kStateChange,
};

inline constexpr Heuristic kAllHeuristics[] = {
    Heuristic::kGripperClose,   Heuristic::kGripperNear,
    Heuristic::kObjectMovement, Heuristic::kRelationChange,
    Heuristic::kStateChange,
};

std::string_view HeuristicName(Heuristic h);
std::optional<Heuristic> HeuristicFromName(std::string_view name);

struct KeystateCandidate {
  int object_id = 0;
  int64_t frame_index = 0;
  Heuristic heuristic = Heuristic::kGripperClose;
  double confidence = 1.0;
};

using HeuristicWeights = std::map<Heuristic, double>;

// alpha_k = 1/K over `enabled`.
HeuristicWeights EqualWeights(const std::set<Heuristic>& enabled);

// Each weight in [0, 1] and the sum equal to 1 within 1e-9.
void ValidateWeights(const HeuristicWeights& weights);

struct Keystate {
  int64_t frame_index = 0;
  int object_id = 0;
  double score = 0.0;
  // Max confidence per contributing heuristic.
  std::map<Heuristic, double> components;
  int64_t first_frame = 0;
  // Other objects whose keystates this one suppressed during aggregation.
  std::vector<int> alternates;
  friend bool operator==(const Keystate&, const Keystate&) = default;
};

// Eq. (1). Per object, candidates within `window` frames of the earliest
// unclaimed one form a cluster that contributes once per heuristic (max
// confidence); S = sum_k alpha_k S_k. The keystate sits at the cluster's
// latest candidate. Candidates of heuristics without a weight are ignored.
// Throws ValidationError for invalid weights.
std::vector<Keystate> ScoreCandidates(const std::vector<KeystateCandidate>& candidates,
                                      const HeuristicWeights& weights, int window);

// Keeps S >= theta.
std::vector<Keystate> Threshold(const std::vector<Keystate>& keystates, double theta);

// Greedy non-maximum suppression by descending score (ties: earlier frame,
// then lower object id); a kept keystate removes all others within
// +-window frames and records their objects as alternates. Output ordered
// by frame.
std::vector<Keystate> Aggregate(std::vector<Keystate> keystates, int window);

struct CandidateOptions {
  // Grade movement confidence by displacement over threshold, capped at 1.
  bool graded_movement = false;
};

std::vector<KeystateCandidate> CollectCandidates(const EpisodeSignals& signals,
                                                 const CandidateOptions& options = {});

// Heuristics among `enabled` whose input signals the episode carries.
std::set<Heuristic> AvailableHeuristics(const EpisodeSignals& signals,
                                        const std::set<Heuristic>& enabled);

}  // namespace playseg

#endif  // PLAYSEG_KEYSTATES_H_
