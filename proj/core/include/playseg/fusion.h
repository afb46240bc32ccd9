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

#ifndef PLAYSEG_FUSION_H_
#define PLAYSEG_FUSION_H_

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "playseg/registry.h"
#include "playseg/stream.h"

namespace playseg {

struct StaticBox {
  int object_id = 0;
  Box box;
  int support = 0;
  double confidence = 0.0;
};

struct TrackFrame {
  bool present = false;
  std::optional<Box> box;
  std::shared_ptr<const Mask> mask;
  // Fused score of the bound detection.
  double score = 0.0;
  // Mean flow over the entry's names, when the stream carries any.
  std::optional<double> flow;
  // Stream key the entry was seen under in this frame.
  std::string matched_name;
};

struct ObjectTrack {
  int object_id = 0;
  // Aligned with Episode::frames.
  std::vector<TrackFrame> frames;
  std::map<std::string, std::vector<double>> class_history;
  std::string resolved_class;
  double resolved_score = 0.0;
  std::optional<StaticBox> static_box;

  size_t PresentCount() const;
};

struct FusionOptions {
  double mad_cutoff = 2.5;
  // DBSCAN eps as a fraction of the image diagonal.
  double eps_frac = 0.05;
  int min_pts = 2;
  double min_component_frac = 0.2;
};

// Outlier trim on centers, DBSCAN on corner 4-vectors, pick the cluster with
// the highest summed confidence, return its mean box. Throws Error on empty
// input.
StaticBox RefineStaticBox(const std::vector<std::pair<Box, double>>& boxes,
                          double image_diagonal, const FusionOptions& options = {});

// Drops components smaller than min_area_frac times the largest one.
Mask CleanMask(const Mask& m, double min_area_frac = 0.2);

// Pixelwise union per class; throws ValidationError on size mismatch.
std::map<std::string, Mask> MergeSameClass(
    const std::vector<std::pair<Mask, std::string>>& masks);

// Highest mean score, ties to the lexicographically smaller name. Throws
// Error for an empty history.
std::pair<std::string, double> ResolveTrackClass(
    const std::map<std::string, std::vector<double>>& history);

// One track per registry entry, indexed by object id.
std::vector<ObjectTrack> BuildTracks(const Episode& ep,
                                     const ObjectRegistry& registry,
                                     const FusionOptions& options = {});

}  // namespace playseg

#endif  // PLAYSEG_FUSION_H_
