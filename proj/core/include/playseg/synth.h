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

#ifndef PLAYSEG_SYNTH_H_
#define PLAYSEG_SYNTH_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "playseg/label_client.h"
#include "playseg/registry.h"
#include "playseg/stream.h"

namespace playseg {

// Scene model: a table of half extents (0.2, 0.3) in table coordinates
// (r to the right, s toward the camera) seen by a pinhole camera with the
// default intrinsics. Depth is the camera z of the table plane, and each
// object's box carries the z of its top face.

struct ScriptObject {
  std::string name;
  std::vector<std::string> synonyms;
  std::string color;
  bool movable = true;
  bool container = false;
  // Empty, or the discrete states (e.g. {"closed", "open"}).
  std::vector<std::string> states;
  std::string initial_state;
  // Footprint center in table coordinates.
  Eigen::Vector2d position = Eigen::Vector2d::Zero();
  // Width along r, depth along s, height above the table.
  Eigen::Vector3d size{0.06, 0.05, 0.04};
};

enum class TaskKind { kPickPlace, kOpen, kClose, kMoveCell };
std::string_view TaskKindName(TaskKind kind);
std::optional<TaskKind> TaskKindFromName(std::string_view name);

struct ScriptTask {
  TaskKind kind = TaskKind::kPickPlace;
  std::string object;
  // pick_place: the reference object and side ("left", "right", "front",
  // "back").
  std::string reference;
  std::string side;
  // move_cell: grid label of the destination.
  std::string cell;
  // pick_place and move_cell: footprint destination in table coordinates.
  std::optional<Eigen::Vector2d> destination;
  // Inclusive frame span: 12 approach frames, then the manipulation; the
  // gripper opens on `end`.
  int64_t start = 0;
  int64_t end = 0;
};

struct NoiseModel {
  double box_sigma = 0.0;  // pixels
  double dropout = 0.0;
  double synonym_rate = 0.0;
  // Per object and frame: an extra low-confidence detection of the same name
  // at a random place on the table.
  double spurious_rate = 0.0;
};

struct Script {
  std::string episode_id = "synth";
  uint64_t seed = 0;
  uint32_t width = 320;
  uint32_t height = 240;
  double fps = 30.0;
  int64_t num_frames = 0;
  ScriptObject surface{"table", {}, "brown", false, false, {}, "", {0.0, 0.0}, {0.4, 0.6, 0.0}};
  std::vector<ScriptObject> objects;
  std::vector<ScriptTask> tasks;
  NoiseModel noise;

  const ScriptObject* FindObject(const std::string& name) const;
};

inline constexpr int64_t kApproachFrames = 12;
inline constexpr int64_t kMinManipulationFrames = 6;

// Task spans ordered, disjoint and inside the episode; referenced objects
// declared; kinds consistent with object properties and states; every
// pick_place and move_cell has a destination on the table. Throws
// ValidationError naming the field.
void ValidateScript(const Script& script);

// Line records, one JSON object per line with a "record" key: "episode",
// "noise", "surface", "object", "task".
std::string SerializeScript(const Script& script);
// Throws ParseError with the line number, then ValidationError.
Script ParseScript(const std::string& text);
Script LoadScript(const std::filesystem::path& path);
void SaveScript(const Script& script, const std::filesystem::path& path);

struct RandomScriptOptions {
  int num_tasks = 10;
  int num_objects = 4;
  bool with_drawer = true;
  int64_t lead_frames = 8;
  int64_t gap_frames = 6;
  int64_t tail_frames = 10;
  int64_t manipulation_frames = 12;
  NoiseModel noise;
};

// Deterministic in (seed, options). Throws Error when no valid layout is
// found for some task.
Script RandomScript(uint64_t seed, const RandomScriptOptions& options = {});

// Instruction text of a task, lowercase: "place the cup to the left of the
// bowl", "place the cup in front of the bowl", "move the cup to the top left
// of the table", "open the drawer".
std::string TaskText(const ScriptTask& task, const Script& script);

// Observation line that verifies the task. pick_place: exact
// "{obj} moved to the {side} of {ref}"; move_cell: starts with "{obj} moved
// from " and ends with " to {cell} of the {surface}"; open/close: exact
// "{obj} changed from closed to open." (or the reverse). Any synonym of the
// names matches.
bool EvidenceMatches(const ScriptTask& task, const Script& script,
                     const std::string& line);

struct TaskLabel {
  int64_t start = 0;
  int64_t end = 0;
  std::string object;
  std::string text;
  friend bool operator==(const TaskLabel&, const TaskLabel&) = default;
};

struct GroundTruth {
  std::string episode_id;
  // Scripted objects; surface at id 0, the rest sorted by name.
  ObjectRegistry registry;
  // One keystate per task at its end frame.
  std::vector<int64_t> keystates;
  std::vector<TaskLabel> tasks;
};

struct SynthOutput {
  Episode episode;
  GroundTruth truth;
};

// Renders the script. Same script, same bytes. Throws ValidationError for an
// invalid script.
SynthOutput Generate(const Script& script);

// Image box of an object footprint at table position `p`.
Box ProjectObjectBox(const Script& script, const ScriptObject& object,
                     const Eigen::Vector2d& p);
// Grid cell of the bottom-center of the object's image box, read in table
// coordinates.
std::string CellOf(const Script& script, const ScriptObject& object,
                   const Eigen::Vector2d& p);

// Deterministic rule-based model standing in for the language model. It
// recognizes every prompt the library sends:
// - object prompt: every scripted task with evidence in the latest run of
//   consecutive outcome lines (movement, cell, state) that has any,
//   confidence 9, plus a low-confidence distractor; a
//   distractor at confidence 7 when nothing matches; an empty block gets a
//   refusal with no tasks.
// - task list prompt: every scripted task, comma-delimited.
// - property prompt: the scripted properties.
// - granularity prompt: the segment tasks joined by ", then ", confidence 8.
// - multiple choice prompt: the choice whose evidence appears latest, else
//   the first choice.
class ScriptedMockClient : public LabelClient {
 public:
  explicit ScriptedMockClient(Script script) : script_(std::move(script)) {}

  std::string Complete(const ChatRequest& request) override;
  std::string model() const override { return "scripted-mock"; }

  const Script& script() const { return script_; }

 private:
  std::string AnswerObjectPrompt(const std::string& prompt) const;
  std::string AnswerPropertyPrompt(const std::string& prompt) const;
  std::string AnswerGranularityPrompt(const std::string& prompt) const;
  std::string AnswerMultipleChoice(const std::string& prompt) const;

  Script script_;
};

}  // namespace playseg

#endif  // PLAYSEG_SYNTH_H_
