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

#include "playseg/observations.h"

#include <algorithm>
#include <random>
#include <regex>

#include "playseg/text.h"

namespace playseg {

namespace {

constexpr std::string_view kKindNames[] = {
    "movement", "relation_change", "state_change",
    "gripper_near", "gripper_close", "surface_position",
};

const std::string& CellPattern() {
  static const std::string pattern = [] {
    std::vector<std::string> labels(GridCellLabels().begin(), GridCellLabels().end());
    // Longest first so "center" does not shadow "center left".
    std::sort(labels.begin(), labels.end(), [](const std::string& a, const std::string& b) {
      return a.size() != b.size() ? a.size() > b.size() : a < b;
    });
    return "(" + Join(labels, "|") + ")";
  }();
  return pattern;
}

class NamePicker {
 public:
  NamePicker(const ObjectRegistry& registry, const ObservationOptions& options)
      : registry_(registry), diverse_(options.synonym_diversity), rng_(options.seed) {}

  std::string operator()(int object_id) {
    const ObjectEntry* e = registry_.Find(object_id);
    if (e == nullptr) return "object " + std::to_string(object_id);
    if (!diverse_ || e->synonyms.empty()) return ToLower(e->canonical_name);
    const std::vector<std::string> names = e->AllNames();
    std::uniform_int_distribution<size_t> pick(0, names.size() - 1);
    return ToLower(names[pick(rng_)]);
  }

 private:
  const ObjectRegistry& registry_;
  bool diverse_;
  std::mt19937_64 rng_;
};

}  // namespace

std::string_view KindName(ObservationKind kind) {
  return kKindNames[static_cast<int>(kind)];
}

std::optional<ObservationKind> KindFromName(std::string_view name) {
  for (size_t i = 0; i < std::size(kKindNames); ++i) {
    if (kKindNames[i] == name) return static_cast<ObservationKind>(i);
  }
  return std::nullopt;
}

std::string RenderMovedRelative(std::string_view obj, std::string_view side,
                                std::string_view other) {
  return std::string(obj) + " moved to the " + std::string(side) + " of " +
         std::string(other);
}

std::string RenderMovedDirection(std::string_view obj, std::string_view direction) {
  return std::string(obj) + " moved " + std::string(direction);
}

std::string RenderMovedCells(std::string_view obj, std::string_view from_cell,
                             std::string_view to_cell, std::string_view surface) {
  return std::string(obj) + " moved from " + std::string(from_cell) + " to " +
         std::string(to_cell) + " of the " + std::string(surface);
}

std::string RenderStateChange(std::string_view obj, std::string_view from_state,
                              std::string_view to_state) {
  return std::string(obj) + " changed from " + std::string(from_state) + " to " +
         std::string(to_state) + ".";
}

std::string RenderGripperNear(std::string_view obj) {
  return "The gripper was close to " + std::string(obj);
}

std::string RenderRelation(std::string_view obj, Relation relation,
                           std::string_view other) {
  return std::string(obj) + " is " + std::string(RelationPhrase(relation)) + " " +
         std::string(other);
}

std::optional<std::string_view> SideWord(Relation r) {
  switch (r) {
    case Relation::kLeftOf: return "left";
    case Relation::kRightOf: return "right";
    case Relation::kInFrontOf: return "front";
    case Relation::kBehind: return "back";
    default: return std::nullopt;
  }
}

std::optional<ParsedObservation> ParseObservationText(std::string_view text) {
  static const std::regex kNear("^The gripper was close to (.+)$");
  static const std::regex kState("^(.+) changed from (.+?) to (.+)\\.$");
  static const std::regex kRelative("^(.+) moved to the (left|right|front|back) of (.+)$");
  static const std::regex kCells("^(.+) moved from " + CellPattern() + " to " +
                                 CellPattern() + " of the (.+)$");
  static const std::regex kDirection(
      "^(.+) moved ((?:forward|backward) and to the (?:left|right)|forward|backward|left|right)$");
  static const std::regex kRelation(
      "^(.+?) is (left of|right of|in front of|behind|on top of|below|inside|next to) (.+)$");

  const std::string s(text);
  std::smatch m;
  ParsedObservation p;
  if (std::regex_match(s, m, kNear)) {
    p.kind = ObservationKind::kGripperNear;
    p.object = m[1];
  } else if (std::regex_match(s, m, kState)) {
    p.kind = ObservationKind::kStateChange;
    p.object = m[1];
    p.from = m[2];
    p.to = m[3];
  } else if (std::regex_match(s, m, kRelative)) {
    p.kind = ObservationKind::kMovement;
    p.object = m[1];
    p.detail = m[2];
    p.other = m[3];
  } else if (std::regex_match(s, m, kCells)) {
    p.kind = ObservationKind::kSurfacePosition;
    p.object = m[1];
    p.from = m[2];
    p.to = m[3];
    p.surface = m[4];
  } else if (std::regex_match(s, m, kDirection)) {
    p.kind = ObservationKind::kMovement;
    p.object = m[1];
    p.detail = m[2];
  } else if (std::regex_match(s, m, kRelation)) {
    p.kind = ObservationKind::kRelationChange;
    p.object = m[1];
    p.detail = m[2];
    p.other = m[3];
  } else {
    return std::nullopt;
  }
  return p;
}

ObservationLog EmitObservations(const EpisodeSignals& signals,
                                const ObjectRegistry& registry,
                                const ObservationOptions& options) {
  NamePicker name(registry, options);
  ObservationLog log;
  auto add = [&](int64_t frame, int id, ObservationKind kind, std::string text,
                 double confidence = 1.0) {
    log.push_back({frame, id, kind, std::move(text), confidence});
  };

  for (const MovementEvent& m : signals.movements) {
    if (m.direction.empty()) continue;
    add(m.end_frame, m.object_id, ObservationKind::kMovement,
        RenderMovedDirection(name(m.object_id), m.direction));
  }
  for (const MovedRelation& r : signals.moved_relations) {
    add(r.frame_index, r.object_id, ObservationKind::kMovement,
        RenderMovedRelative(name(r.object_id), *SideWord(r.relation), name(r.other_id)));
  }
  const ObjectEntry* surface =
      registry.surface_id ? registry.Find(*registry.surface_id) : nullptr;
  if (surface != nullptr) {
    for (const CellMove& c : signals.cell_moves) {
      add(c.frame_index, c.object_id, ObservationKind::kSurfacePosition,
          RenderMovedCells(name(c.object_id), c.from_cell, c.to_cell,
                           ToLower(surface->canonical_name)));
    }
  }
  for (const RelationChange& c : signals.relation_changes) {
    add(c.frame_index, c.subject, ObservationKind::kRelationChange,
        RenderRelation(name(c.subject), c.relation, name(c.object)));
  }
  for (const StateEvent& s : signals.state_events) {
    add(s.frame_index, s.object_id, ObservationKind::kStateChange,
        RenderStateChange(name(s.object_id), s.from_state, s.to_state));
  }
  for (const NearEvent& n : signals.near_events) {
    add(n.frame_index, n.object_id, ObservationKind::kGripperNear,
        RenderGripperNear(name(n.object_id)));
  }

  std::stable_sort(log.begin(), log.end(), [](const Observation& a, const Observation& b) {
    return std::tie(a.frame_index, a.object_id, a.kind, a.text) <
           std::tie(b.frame_index, b.object_id, b.kind, b.text);
  });
  return log;
}

}  // namespace playseg
