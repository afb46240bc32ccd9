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

#ifndef PLAYSEG_SIGNALS_H_
#define PLAYSEG_SIGNALS_H_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "playseg/fusion.h"
#include "playseg/geometry.h"
#include "playseg/registry.h"
#include "playseg/stream.h"

namespace playseg {

// ---------------------------------------------------------------------------
// Spatial relations.

enum class Relation {
  kLeftOf,
  kRightOf,
  kInFrontOf,
  kBehind,
  kOnTopOf,
  kBelow,
  kInside,
  kNextTo,
};

// "left-of", "in-front-of", ...
std::string_view RelationName(Relation r);
// Sentence form: "left of", "in front of", "on top of", ...
std::string_view RelationPhrase(Relation r);
std::optional<Relation> RelationFromPhrase(std::string_view phrase);
// Mirror relation for the swapped pair; kInside has none.
std::optional<Relation> InverseRelation(Relation r);
bool IsDirectional(Relation r);

struct RelationEdge {
  int subject = 0;
  Relation relation = Relation::kNextTo;
  int object = 0;
  friend auto operator<=>(const RelationEdge&, const RelationEdge&) = default;
};

struct SceneGraph {
  int64_t frame_index = 0;
  std::vector<int> nodes;
  // Sorted.
  std::vector<RelationEdge> edges;

  bool Has(int subject, Relation r, int object) const;
};

// Orthonormal frame on the support surface. `up` faces the camera, `front`
// is the camera's -z axis projected into the plane, right = up x front.
struct SurfaceFrame {
  Eigen::Vector3d origin = Eigen::Vector3d::Zero();
  Eigen::Vector3d up = -Eigen::Vector3d::UnitZ();
  Eigen::Vector3d front = Eigen::Vector3d::UnitY();
  Eigen::Vector3d right = Eigen::Vector3d::UnitX();

  // (right, front, up) coordinates of a camera-frame point.
  Eigen::Vector3d ToLocal(const Eigen::Vector3d& p) const;
};

// Builds the axes from a fitted plane. Falls back to front = +y when the
// camera axis is parallel to the normal.
SurfaceFrame MakeSurfaceFrame(const Plane& plane, const Eigen::Vector3d& origin);

// Fits the plane to the surface cloud of the first frame that has both a
// surface mask and depth. Throws Error("depth required") without depth and
// DegenerateError for a degenerate plane.
SurfaceFrame ComputeSurfaceFrame(const ObjectTrack& surface, const Episode& ep,
                                 const Intrinsics& intrinsics,
                                 const BackprojectOptions& options = {});

// Per-frame geometry of one object.
struct ObjectSnapshot {
  int object_id = 0;
  Box box;
  // Camera-frame centroid; absent without depth.
  std::optional<Eigen::Vector3d> position;
  std::optional<double> median_depth;
  std::optional<std::pair<double, double>> depth_span;
};

struct RelationOptions {
  double tau_rel = 0.05;
  double neighbor_radius = 0.35;
  double on_top_overlap = 0.3;
  double inside_scale = 1.05;
};

// Relations for every ordered pair within the neighbour radius. Without a
// surface frame (or 3-D positions) coordinates fall back to image units
// divided by the diagonal with right = +x and front = +y; on-top-of and
// below then never fire.
SceneGraph BuildRelationGraph(int64_t frame_index,
                              const std::vector<ObjectSnapshot>& objects,
                              const SurfaceFrame* frame,
                              const ObjectRegistry& registry,
                              double image_diagonal,
                              const RelationOptions& options = {});

struct RelationChange {
  int64_t frame_index = 0;
  int subject = 0;
  int object = 0;
  Relation relation = Relation::kNextTo;
  friend bool operator==(const RelationChange&, const RelationChange&) = default;
};

// A relation becomes established after `persistence` consecutive joint
// observations of the pair and is dropped after as many misses. Each
// establishment after the pair's initial state is reported at the first
// frame of its run.
std::vector<RelationChange> TrackRelationChanges(
    const std::vector<SceneGraph>& graphs, int persistence = 3);

// ---------------------------------------------------------------------------
// Surface grid.

// Projects the box's bottom-center through `to_unit` and names its cell.
std::string SurfaceGridPosition(const Box& box, const Homography& to_unit);
// Homography from the quad to the unit square. Throws DegenerateError.
std::string SurfaceGridPosition(const Box& box, const Quad& quad);
Homography QuadToUnitSquare(const Quad& quad);

// ---------------------------------------------------------------------------
// Movement.

struct MovementOptions {
  // Fraction of image width.
  double disp_thresh = 0.05;
  // Pixels per frame.
  double flow_thresh = 2.0;
  int flow_min_frames = 3;
};

struct MovementEvent {
  int object_id = 0;
  int64_t start_frame = 0;
  int64_t end_frame = 0;
  Box start_box;
  Box end_box;
  // Empty when the boxes did not move.
  std::string direction;
  bool by_flow = false;
  bool by_displacement = false;
  // Center displacement over the displacement threshold.
  double magnitude = 0.0;
};

// 8-way direction of an image displacement: "right", "left", "forward" (+y,
// toward the camera), "backward", and "forward and to the left" style
// diagonals. Empty for a zero vector.
std::string DirectionWord(const Eigen::Vector2d& displacement);

std::vector<MovementEvent> DetectMovement(const ObjectTrack& track,
                                          const Episode& ep,
                                          const MovementOptions& options = {});

// ---------------------------------------------------------------------------
// States.

struct StateOptions {
  int window = 5;
  int votes = 3;
  double occlusion_iou = 0.15;
  double crop_padding = 0.1;
};

struct StateEvent {
  int object_id = 0;
  int64_t frame_index = 0;
  std::string from_state;
  std::string to_state;
  friend bool operator==(const StateEvent&, const StateEvent&) = default;
};

// Majority smoothing over the trailing `window` observed samples; absent
// samples (occluded or unscored) are skipped.
std::vector<StateEvent> SmoothStateSequence(
    const std::vector<int64_t>& frames,
    const std::vector<std::optional<std::string>>& states,
    const StateOptions& options = {});

std::vector<StateEvent> DetectStateChanges(const ObjectTrack& track,
                                           const ObjectEntry& entry,
                                           const Episode& ep,
                                           const StateOptions& options = {});

// ---------------------------------------------------------------------------
// Gripper.

struct GripperOptions {
  int near_frames = 3;
  double tau_scale = 0.04;
  double tau_reference_size = 0.1;
  double tau_min = 0.02;
  double tau_max = 0.08;
  bool depth_scaling = true;
};

// Per-object proximity threshold in diagonal-normalized units.
double ObjectThreshold(const Box& box, double image_diagonal,
                       const GripperOptions& options = {});

// Smallest pixel distance between the box and any mask pixel center.
double BoxMaskDistance(const Box& box, const Mask& mask);

// Scales an image distance by the ratio of the larger to the smaller median
// depth. The only place depth calibrates proximity.
double DepthScaledDistance(double distance, double gripper_depth,
                           double object_depth);

struct NearEvent {
  int object_id = 0;
  // Third frame of the run.
  int64_t frame_index = 0;
  int64_t run_start = 0;
  int64_t run_end = 0;
  friend bool operator==(const NearEvent&, const NearEvent&) = default;
};

// One event per run of at least `near_frames` samples below `tau`. Absent
// samples neither extend nor break a run.
std::vector<NearEvent> ScanNearRuns(const std::vector<int64_t>& frames,
                                    const std::vector<std::optional<double>>& distances,
                                    double tau, int near_frames = 3);

struct GripperCloseEvent {
  int64_t frame_index = 0;
  // Nearest object at the opening, or -1.
  int object_id = -1;
};

// Positions of closed-to-open transitions; absent samples keep the last
// known state.
std::vector<size_t> GripperOpenings(const std::vector<std::optional<bool>>& closed);

// ---------------------------------------------------------------------------
// Whole-episode extraction.

struct SignalOptions {
  MovementOptions movement;
  RelationOptions relation;
  StateOptions state;
  GripperOptions gripper;
  std::optional<Intrinsics> intrinsics;
  BackprojectOptions surface_cloud{4, 8, 2.0};
  uint32_t object_stride = 2;
  int relation_persistence = 3;
};

// Relation newly holding after a movement, verbalized as
// "moved to the {word} of".
struct MovedRelation {
  int64_t frame_index = 0;
  int object_id = 0;
  int other_id = 0;
  Relation relation = Relation::kLeftOf;
};

struct CellMove {
  int64_t frame_index = 0;
  int object_id = 0;
  std::string from_cell;
  std::string to_cell;
};

struct EpisodeSignals {
  std::vector<MovementEvent> movements;
  std::vector<MovedRelation> moved_relations;
  std::vector<CellMove> cell_moves;
  std::vector<RelationChange> relation_changes;
  std::vector<StateEvent> state_events;
  std::vector<NearEvent> near_events;
  std::vector<GripperCloseEvent> close_events;
  std::optional<SurfaceFrame> surface_frame;
  std::optional<Quad> surface_quad;

  bool has_gripper = false;
  bool has_flow = false;
  bool has_state_scores = false;
  bool has_depth = false;
};

EpisodeSignals ComputeSignals(const Episode& ep, const ObjectRegistry& registry,
                              const std::vector<ObjectTrack>& tracks,
                              const SignalOptions& options = {});

}  // namespace playseg

#endif  // PLAYSEG_SIGNALS_H_
