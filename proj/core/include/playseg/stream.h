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

#ifndef PLAYSEG_STREAM_H_
#define PLAYSEG_STREAM_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "playseg/box.h"
#include "playseg/geometry.h"
#include "playseg/mask.h"

namespace playseg {

// Reserved mask key for the robot body.
inline constexpr char kRobotMaskKey[] = "robot";

struct RawDetection {
  std::string name;
  Box box;
  double confidence = 0.0;
  // Optional image-text alignment score for the cropped region.
  std::optional<double> alignment;
  friend bool operator==(const RawDetection&, const RawDetection&) = default;
};

// `object` is the detection name the mask belongs to, kRobotMaskKey for the
// robot, or empty for a class-agnostic mask.
struct MaskRecord {
  std::string object;
  std::shared_ptr<const Mask> mask;
  friend bool operator==(const MaskRecord& a, const MaskRecord& b) {
    return a.object == b.object &&
           (a.mask == b.mask || (a.mask && b.mask && *a.mask == *b.mask));
  }
};

struct GripperRecord {
  bool closed = false;
  std::optional<Box> end_effector_box;
  friend bool operator==(const GripperRecord&, const GripperRecord&) = default;
};

struct VlmProposal {
  std::string name;
  std::string color;
  friend bool operator==(const VlmProposal&, const VlmProposal&) = default;
};

struct ObjectnessBox {
  Box box;
  double objectness = 0.0;
  friend bool operator==(const ObjectnessBox&, const ObjectnessBox&) = default;
};

using StateScores = std::map<std::string, double>;

struct FrameRecord {
  int64_t frame_index = 0;
  std::vector<RawDetection> detections;
  std::vector<MaskRecord> masks;
  std::shared_ptr<const DepthMap> depth;
  std::optional<std::map<std::string, double>> flow_magnitude;
  std::optional<GripperRecord> gripper;
  std::optional<std::vector<VlmProposal>> vlm_proposals;
  std::optional<std::map<std::string, StateScores>> state_scores;
  std::optional<std::vector<ObjectnessBox>> objectness_boxes;

  const Mask* FindMask(const std::string& object) const;

  friend bool operator==(const FrameRecord& a, const FrameRecord& b);
};

struct Episode {
  std::string episode_id;
  uint32_t width = 0;
  uint32_t height = 0;
  double fps = 30.0;
  std::vector<FrameRecord> frames;

  double Diagonal() const;
  // Position of `frame_index` in `frames`, or -1.
  int64_t PositionOf(int64_t frame_index) const;

  friend bool operator==(const Episode&, const Episode&) = default;
};

// Throws ValidationError naming the field (and frame) of the first violated
// invariant. Never repairs.
void ValidateEpisode(const Episode& ep);

// Reads the line-delimited index file at `path` plus the sidecars it refers
// to (paths relative to the index file's directory). Throws ParseError with
// the offending line number, ValidationError, or IoError.
Episode LoadEpisode(const std::filesystem::path& path);

// Writes the index file and content-addressed sidecars under
// path.parent_path(). Absent optional fields are omitted. Throws IoError.
void SaveEpisode(const Episode& ep, const std::filesystem::path& path);

// Reads/writes a whole file; throw IoError with the path.
std::string ReadFile(const std::filesystem::path& path);
void WriteFile(const std::filesystem::path& path, const std::string& contents);

}  // namespace playseg

#endif  // PLAYSEG_STREAM_H_
