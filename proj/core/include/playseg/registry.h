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

#ifndef PLAYSEG_REGISTRY_H_
#define PLAYSEG_REGISTRY_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "playseg/label_client.h"
#include "playseg/stream.h"

namespace playseg {

struct ObjectProperties {
  bool movable = false;
  bool is_container = false;
  std::vector<std::string> states;
  bool interactable = false;
  friend bool operator==(const ObjectProperties&,
                         const ObjectProperties&) = default;
};

struct ObjectEntry {
  int object_id = 0;
  std::string canonical_name;
  std::vector<std::string> synonyms;
  std::string color;
  ObjectProperties properties;
  bool is_surface = false;
  double representative_confidence = 0.0;

  bool HasName(const std::string& name) const;
  // Canonical name followed by synonyms.
  std::vector<std::string> AllNames() const;
  friend bool operator==(const ObjectEntry&, const ObjectEntry&) = default;
};

struct ObjectRegistry {
  std::vector<ObjectEntry> entries;
  std::optional<int> surface_id;

  const ObjectEntry* Find(int object_id) const;
  // Entry listing `name` as canonical or synonym.
  const ObjectEntry* FindByName(const std::string& name) const;
  friend bool operator==(const ObjectRegistry&, const ObjectRegistry&) = default;
};

// Dense ids, unique names, at most one surface, surfaces immovable.
void ValidateRegistry(const ObjectRegistry& registry);

// `n` positions in [0, frame_count) spaced evenly with both endpoints,
// rounded half away from zero. Returns indices into the frame sequence.
std::vector<size_t> SampleQueryFrames(size_t frame_count, int n);
std::vector<int64_t> SampleQueryFrames(const Episode& ep, int n);

// Single-linkage grouping of one frame's detections over IOU >= iou_thresh.
// Groups are ordered by their smallest member index; members ascending.
std::vector<std::vector<size_t>> GroupCooccurring(
    const std::vector<RawDetection>& dets, double iou_thresh);

// One co-occurrence group in one query frame.
struct DetectionGroup {
  int64_t frame_index = 0;
  // Confidences are already fused with alignment scores.
  std::vector<RawDetection> members;
};

// Merges groups across frames and picks names. Two groups merge when they
// share a name, or when their median boxes overlap with IOU >= iou_thresh
// and the merged object would not appear twice in one frame. The canonical
// name has the highest mean confidence (ties: lexicographically smaller);
// synonyms follow by descending mean confidence. Entries are ordered by
// canonical name; properties and colors are left empty.
ObjectRegistry ConsensusNames(const std::vector<DetectionGroup>& groups,
                              double iou_thresh);

// Keeps a detection iff a class-agnostic box overlaps it with IOU >=
// min_iou and objectness >= min_objectness. Pass-through when `boxes` is
// absent.
std::vector<RawDetection> FilterObjectness(
    const std::vector<RawDetection>& dets,
    const std::optional<std::vector<ObjectnessBox>>& boxes,
    double min_objectness = 0.1, double min_iou = 0.5);

// Mean of detector confidence and alignment score; the detector confidence
// alone when alignment is absent.
double CombineAlignment(double detector_conf, std::optional<double> alignment);
double CombineAlignment(const RawDetection& det);

struct RegistryOptions {
  int query_frames = 8;
  double iou_thresh = 0.5;
  double min_objectness = 0.1;
};

// Stage 1 without properties: query frames, objectness filter, grouping,
// consensus naming, colors and the surface from the proposals. The surface
// is the most frequent first proposal across query frames ("None" ignored)
// and is moved to id 0.
ObjectRegistry BuildRegistry(const Episode& ep, const RegistryOptions& options);

// Property prompt and reply parser, exposed for tests and mocks.
std::string BuildPropertyPrompt(const ObjectRegistry& registry);
// Parses the reply into one property set per entry (registry order). Throws
// ResponseError with the raw payload on malformed input or missing objects.
std::vector<ObjectProperties> ParsePropertyResponse(
    const ObjectRegistry& registry, const std::string& raw);
std::string RenderPropertyResponse(const std::vector<std::string>& names,
                                   const std::vector<ObjectProperties>& props);

// Fills in properties with one model call. The surface is forced immovable.
ObjectRegistry AssignProperties(ObjectRegistry registry, LabelClient& llm);

}  // namespace playseg

#endif  // PLAYSEG_REGISTRY_H_
