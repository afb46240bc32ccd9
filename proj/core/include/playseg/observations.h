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

#ifndef PLAYSEG_OBSERVATIONS_H_
#define PLAYSEG_OBSERVATIONS_H_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "playseg/registry.h"
#include "playseg/signals.h"

namespace playseg {

enum class ObservationKind {
  kMovement,
  kRelationChange,
  kStateChange,
  kGripperNear,
  kGripperClose,
  kSurfacePosition,
};

std::string_view KindName(ObservationKind kind);
std::optional<ObservationKind> KindFromName(std::string_view name);

struct Observation {
  int64_t frame_index = 0;
  int object_id = 0;
  ObservationKind kind = ObservationKind::kMovement;
  std::string text;
  double confidence = 1.0;
  friend bool operator==(const Observation&, const Observation&) = default;
};

using ObservationLog = std::vector<Observation>;

// Templates. Names are rendered as given.
std::string RenderMovedRelative(std::string_view obj, std::string_view side,
                                std::string_view other);
std::string RenderMovedDirection(std::string_view obj, std::string_view direction);
std::string RenderMovedCells(std::string_view obj, std::string_view from_cell,
                             std::string_view to_cell, std::string_view surface);
std::string RenderStateChange(std::string_view obj, std::string_view from_state,
                              std::string_view to_state);
std::string RenderGripperNear(std::string_view obj);
std::string RenderRelation(std::string_view obj, Relation relation,
                           std::string_view other);

// Side word used in "moved to the {side} of": left, right, front, back.
std::optional<std::string_view> SideWord(Relation r);

// Fields recovered from a rendered sentence.
struct ParsedObservation {
  ObservationKind kind = ObservationKind::kMovement;
  std::string object;
  std::string other;
  // Side word, direction phrase, or relation phrase.
  std::string detail;
  std::string from;
  std::string to;
  std::string surface;
  friend bool operator==(const ParsedObservation&, const ParsedObservation&) = default;
};

std::optional<ParsedObservation> ParseObservationText(std::string_view text);

struct ObservationOptions {
  // Render a uniformly sampled name (canonical or synonym) per sentence.
  bool synonym_diversity = false;
  uint64_t seed = 0;
};

// Renders every event; ordered by (frame, object id, kind, text).
ObservationLog EmitObservations(const EpisodeSignals& signals,
                                const ObjectRegistry& registry,
                                const ObservationOptions& options = {});

}  // namespace playseg

#endif  // PLAYSEG_OBSERVATIONS_H_
