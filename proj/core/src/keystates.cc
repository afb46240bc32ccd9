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

#include "playseg/keystates.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "playseg/error.h"

namespace playseg {

std::string_view HeuristicName(Heuristic h) {
  switch (h) {
    case Heuristic::kGripperClose: return "gripper_close";
    case Heuristic::kGripperNear: return "gripper_near";
    case Heuristic::kObjectMovement: return "object_movement";
    case Heuristic::kRelationChange: return "relation_change";
    case Heuristic::kStateChange: return "state_change";
  }
  return "";
}

std::optional<Heuristic> HeuristicFromName(std::string_view name) {
  for (Heuristic h : kAllHeuristics) {
    if (HeuristicName(h) == name) return h;
  }
  return std::nullopt;
}

HeuristicWeights EqualWeights(const std::set<Heuristic>& enabled) {
  HeuristicWeights w;
  for (Heuristic h : enabled) w[h] = 1.0 / static_cast<double>(enabled.size());
  return w;
}

void ValidateWeights(const HeuristicWeights& weights) {
  double sum = 0.0;
  for (const auto& [h, w] : weights) {
    if (!(w >= 0.0 && w <= 1.0)) {
      throw ValidationError("weights." + std::string(HeuristicName(h)),
                            "must lie in [0, 1]");
    }
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw ValidationError("weights", "must sum to 1, got " + std::to_string(sum));
  }
}

std::vector<Keystate> ScoreCandidates(const std::vector<KeystateCandidate>& candidates,
                                      const HeuristicWeights& weights, int window) {
  ValidateWeights(weights);
  std::map<int, std::vector<KeystateCandidate>> by_object;
  for (const KeystateCandidate& c : candidates) {
    if (weights.count(c.heuristic) == 0) continue;
    if (!(c.confidence >= 0.0 && c.confidence <= 1.0)) {
      throw ValidationError("heuristic_confidence", "must lie in [0, 1]", c.frame_index);
    }
    by_object[c.object_id].push_back(c);
  }

  std::vector<Keystate> out;
  for (auto& [object_id, list] : by_object) {
    std::sort(list.begin(), list.end(), [](const KeystateCandidate& a, const KeystateCandidate& b) {
      return std::tie(a.frame_index, a.heuristic) < std::tie(b.frame_index, b.heuristic);
    });
    size_t i = 0;
    while (i < list.size()) {
      Keystate k;
      k.object_id = object_id;
      k.first_frame = list[i].frame_index;
      size_t j = i;
      for (; j < list.size() && list[j].frame_index <= k.first_frame + window; ++j) {
        double& slot = k.components[list[j].heuristic];
        slot = std::max(slot, list[j].confidence);
        k.frame_index = list[j].frame_index;
      }
      for (const auto& [h, s] : k.components) k.score += weights.at(h) * s;
      out.push_back(std::move(k));
      i = j;
    }
  }
  std::sort(out.begin(), out.end(), [](const Keystate& a, const Keystate& b) {
    return std::tie(a.frame_index, a.object_id) < std::tie(b.frame_index, b.object_id);
  });
  return out;
}

std::vector<Keystate> Threshold(const std::vector<Keystate>& keystates, double theta) {
  std::vector<Keystate> kept;
  for (const Keystate& k : keystates) {
    if (k.score >= theta) kept.push_back(k);
  }
  return kept;
}

std::vector<Keystate> Aggregate(std::vector<Keystate> keystates, int window) {
  std::sort(keystates.begin(), keystates.end(), [](const Keystate& a, const Keystate& b) {
    if (a.score != b.score) return a.score > b.score;
    return std::tie(a.frame_index, a.object_id) < std::tie(b.frame_index, b.object_id);
  });
  std::vector<Keystate> kept;
  for (Keystate& k : keystates) {
    auto winner = std::find_if(kept.begin(), kept.end(), [&](const Keystate& s) {
      return std::llabs(s.frame_index - k.frame_index) <= window;
    });
    if (winner == kept.end()) {
      k.alternates.clear();
      kept.push_back(std::move(k));
    } else if (k.object_id != winner->object_id &&
               std::find(winner->alternates.begin(), winner->alternates.end(),
                         k.object_id) == winner->alternates.end()) {
      winner->alternates.push_back(k.object_id);
    }
  }
  std::sort(kept.begin(), kept.end(), [](const Keystate& a, const Keystate& b) {
    return std::tie(a.frame_index, a.object_id) < std::tie(b.frame_index, b.object_id);
  });
  return kept;
}

std::vector<KeystateCandidate> CollectCandidates(const EpisodeSignals& signals,
                                                 const CandidateOptions& options) {
  std::vector<KeystateCandidate> out;
  for (const GripperCloseEvent& e : signals.close_events) {
    if (e.object_id >= 0) {
      out.push_back({e.object_id, e.frame_index, Heuristic::kGripperClose, 1.0});
    }
  }
  for (const NearEvent& e : signals.near_events) {
    out.push_back({e.object_id, e.run_end, Heuristic::kGripperNear, 1.0});
  }
  for (const MovementEvent& m : signals.movements) {
    const double conf = options.graded_movement ? std::min(1.0, m.magnitude) : 1.0;
    out.push_back({m.object_id, m.end_frame, Heuristic::kObjectMovement, conf});
  }
  for (const RelationChange& c : signals.relation_changes) {
    out.push_back({c.subject, c.frame_index, Heuristic::kRelationChange, 1.0});
  }
  for (const StateEvent& s : signals.state_events) {
    out.push_back({s.object_id, s.frame_index, Heuristic::kStateChange, 1.0});
  }
  return out;
}

std::set<Heuristic> AvailableHeuristics(const EpisodeSignals& signals,
                                        const std::set<Heuristic>& enabled) {
  std::set<Heuristic> out;
  for (Heuristic h : enabled) {
    switch (h) {
      case Heuristic::kGripperClose:
      case Heuristic::kGripperNear:
        if (signals.has_gripper) out.insert(h);
        break;
      case Heuristic::kStateChange:
        if (signals.has_state_scores) out.insert(h);
        break;
      case Heuristic::kObjectMovement:
      case Heuristic::kRelationChange:
        out.insert(h);
        break;
    }
  }
  return out;
}

}  // namespace playseg
