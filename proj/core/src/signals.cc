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

#include "playseg/signals.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <limits>
#include <set>

#include <Eigen/Geometry>

#include "playseg/error.h"

namespace playseg {

namespace {

struct RelationInfo {
  Relation relation;
  std::string_view name;
  std::string_view phrase;
};

constexpr RelationInfo kRelations[] = {
    {Relation::kLeftOf, "left-of", "left of"},
    {Relation::kRightOf, "right-of", "right of"},
    {Relation::kInFrontOf, "in-front-of", "in front of"},
    {Relation::kBehind, "behind", "behind"},
    {Relation::kOnTopOf, "on-top-of", "on top of"},
    {Relation::kBelow, "below", "below"},
    {Relation::kInside, "inside", "inside"},
    {Relation::kNextTo, "next-to", "next to"},
};

double MedianInPlace(std::vector<double>& v) {
  const size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  if (v.size() % 2 == 1) return v[mid];
  const double hi = v[mid];
  const double lo = *std::max_element(v.begin(), v.begin() + mid);
  return 0.5 * (lo + hi);
}

Eigen::Vector2d Median3(const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                        const Eigen::Vector2d& c) {
  auto med = [](double x, double y, double z) {
    return std::max(std::min(x, y), std::min(std::max(x, y), z));
  };
  return {med(a.x(), b.x(), c.x()), med(a.y(), b.y(), c.y())};
}

Box ClipBox(const Box& b, double w, double h) {
  return {std::clamp(b.x1, 0.0, w), std::clamp(b.y1, 0.0, h),
          std::clamp(b.x2, 0.0, w), std::clamp(b.y2, 0.0, h)};
}

// Median depth of the map inside a box, sampled on a stride-2 lattice.
std::optional<double> MedianDepthInBox(const DepthMap& depth, const Box& box) {
  const Box b = ClipBox(box, depth.width, depth.height);
  std::vector<double> values;
  for (uint32_t y = static_cast<uint32_t>(b.y1); y < static_cast<uint32_t>(std::ceil(b.y2)); y += 2) {
    for (uint32_t x = static_cast<uint32_t>(b.x1); x < static_cast<uint32_t>(std::ceil(b.x2)); x += 2) {
      if (x < depth.width && y < depth.height) values.push_back(depth.At(x, y));
    }
  }
  if (values.empty()) return std::nullopt;
  return MedianInPlace(values);
}

}  // namespace

std::string_view RelationName(Relation r) {
  return kRelations[static_cast<int>(r)].name;
}

std::string_view RelationPhrase(Relation r) {
  return kRelations[static_cast<int>(r)].phrase;
}

std::optional<Relation> RelationFromPhrase(std::string_view phrase) {
  for (const RelationInfo& info : kRelations) {
    if (info.phrase == phrase) return info.relation;
  }
  return std::nullopt;
}

std::optional<Relation> InverseRelation(Relation r) {
  switch (r) {
    case Relation::kLeftOf: return Relation::kRightOf;
    case Relation::kRightOf: return Relation::kLeftOf;
    case Relation::kInFrontOf: return Relation::kBehind;
    case Relation::kBehind: return Relation::kInFrontOf;
    case Relation::kOnTopOf: return Relation::kBelow;
    case Relation::kBelow: return Relation::kOnTopOf;
    case Relation::kInside: return std::nullopt;
    case Relation::kNextTo: return Relation::kNextTo;
  }
  return std::nullopt;
}

bool IsDirectional(Relation r) {
  return r == Relation::kLeftOf || r == Relation::kRightOf ||
         r == Relation::kInFrontOf || r == Relation::kBehind;
}

bool SceneGraph::Has(int subject, Relation r, int object) const {
  return std::binary_search(edges.begin(), edges.end(),
                            RelationEdge{subject, r, object});
}

Eigen::Vector3d SurfaceFrame::ToLocal(const Eigen::Vector3d& p) const {
  const Eigen::Vector3d d = p - origin;
  return {d.dot(right), d.dot(front), d.dot(up)};
}

SurfaceFrame MakeSurfaceFrame(const Plane& plane, const Eigen::Vector3d& origin) {
  SurfaceFrame f;
  f.origin = origin;
  f.up = plane.normal.normalized();
  auto project = [&](const Eigen::Vector3d& v) -> Eigen::Vector3d {
    return v - v.dot(f.up) * f.up;
  };
  Eigen::Vector3d front = project(-Eigen::Vector3d::UnitZ());
  if (front.norm() < 1e-6) front = project(Eigen::Vector3d::UnitY());
  if (front.norm() < 1e-6) front = project(Eigen::Vector3d::UnitX());
  f.front = front.normalized();
  f.right = f.up.cross(f.front).normalized();
  return f;
}

SurfaceFrame ComputeSurfaceFrame(const ObjectTrack& surface, const Episode& ep,
                                 const Intrinsics& intrinsics,
                                 const BackprojectOptions& options) {
  for (size_t t = 0; t < ep.frames.size(); ++t) {
    const TrackFrame& tf = surface.frames[t];
    const FrameRecord& f = ep.frames[t];
    if (!tf.mask || !f.depth) continue;
    PointCloud cloud = Backproject(*f.depth, intrinsics, tf.mask.get(), options);
    const Plane plane = FitPlane(cloud);
    return MakeSurfaceFrame(plane, cloud.Centroid());
  }
  throw Error("surface frame: depth required");
}

SceneGraph BuildRelationGraph(int64_t frame_index,
                              const std::vector<ObjectSnapshot>& objects,
                              const SurfaceFrame* frame,
                              const ObjectRegistry& registry,
                              double image_diagonal,
                              const RelationOptions& options) {
  SceneGraph g;
  g.frame_index = frame_index;
  const size_t n = objects.size();
  for (const ObjectSnapshot& o : objects) g.nodes.push_back(o.object_id);
  std::sort(g.nodes.begin(), g.nodes.end());

  const bool use_3d =
      frame != nullptr &&
      std::all_of(objects.begin(), objects.end(),
                  [](const ObjectSnapshot& o) { return o.position.has_value(); });
  std::vector<Eigen::Vector3d> local(n);
  for (size_t i = 0; i < n; ++i) {
    if (use_3d) {
      local[i] = frame->ToLocal(*objects[i].position);
    } else {
      const Eigen::Vector2d c = objects[i].box.Center() / image_diagonal;
      local[i] = {c.x(), c.y(), 0.0};
    }
  }

  const double tau = options.tau_rel;
  std::vector<std::vector<bool>> related(n, std::vector<bool>(n, false));
  std::vector<std::vector<bool>> near(n, std::vector<bool>(n, false));
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < n; ++j) {
      if (i == j || objects[i].object_id == objects[j].object_id) continue;
      const Eigen::Vector3d d = local[i] - local[j];
      if (std::hypot(d.x(), d.y()) > options.neighbor_radius) continue;
      near[i][j] = true;
      const ObjectSnapshot& a = objects[i];
      const ObjectSnapshot& b = objects[j];
      auto add = [&](Relation r) {
        g.edges.push_back({a.object_id, r, b.object_id});
        related[i][j] = true;
      };
      if (d.x() > tau) add(Relation::kRightOf);
      if (d.x() < -tau) add(Relation::kLeftOf);
      if (d.y() > tau) add(Relation::kInFrontOf);
      if (d.y() < -tau) add(Relation::kBehind);
      if (use_3d) {
        const double smaller = std::min(a.box.Area(), b.box.Area());
        const double overlap =
            smaller > 0.0 ? IntersectionArea(a.box, b.box) / smaller : 0.0;
        if (overlap >= options.on_top_overlap) {
          if (d.z() > tau) add(Relation::kOnTopOf);
          if (d.z() < -tau) add(Relation::kBelow);
        }
      }
      const ObjectEntry* container = registry.Find(b.object_id);
      if (container != nullptr && container->properties.is_container &&
          a.box.Area() < b.box.Area()) {
        const Box outer = b.box.Scaled(options.inside_scale);
        const bool contained = a.box.x1 >= outer.x1 && a.box.y1 >= outer.y1 &&
                               a.box.x2 <= outer.x2 && a.box.y2 <= outer.y2;
        bool depth_ok = true;
        if (a.median_depth && b.depth_span) {
          depth_ok = *a.median_depth >= b.depth_span->first &&
                     *a.median_depth <= b.depth_span->second;
        }
        if (contained && depth_ok) add(Relation::kInside);
      }
    }
  }
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < n; ++j) {
      if (near[i][j] && !related[i][j] && !related[j][i]) {
        g.edges.push_back({objects[i].object_id, Relation::kNextTo,
                           objects[j].object_id});
      }
    }
  }
  std::sort(g.edges.begin(), g.edges.end());
  g.edges.erase(std::unique(g.edges.begin(), g.edges.end()), g.edges.end());
  return g;
}

std::vector<RelationChange> TrackRelationChanges(
    const std::vector<SceneGraph>& graphs, int persistence) {
  struct RelState {
    bool established = false;
    int present_run = 0;
    int absent_run = 0;
    int64_t run_start = 0;
  };
  struct PairState {
    int observations = 0;
    bool initialized = false;
    std::map<Relation, RelState> relations;
  };
  std::map<std::pair<int, int>, PairState> pairs;
  std::vector<RelationChange> changes;

  for (const SceneGraph& g : graphs) {
    for (int a : g.nodes) {
      for (int b : g.nodes) {
        if (a == b) continue;
        PairState& ps = pairs[{a, b}];
        std::set<Relation> now;
        for (const RelationEdge& e : g.edges) {
          if (e.subject == a && e.object == b) now.insert(e.relation);
        }
        for (Relation r : now) ps.relations.try_emplace(r);
        for (auto& [r, rs] : ps.relations) {
          if (now.count(r) > 0) {
            if (rs.present_run == 0) rs.run_start = g.frame_index;
            ++rs.present_run;
            rs.absent_run = 0;
          } else {
            ++rs.absent_run;
            rs.present_run = 0;
          }
          if (!rs.established && rs.present_run >= persistence) {
            rs.established = true;
            if (ps.initialized) {
              changes.push_back({rs.run_start, a, b, r});
            }
          } else if (rs.established && rs.absent_run >= persistence) {
            rs.established = false;
          }
        }
        if (++ps.observations >= persistence) ps.initialized = true;
      }
    }
  }
  std::sort(changes.begin(), changes.end(),
            [](const RelationChange& x, const RelationChange& y) {
              return std::tie(x.frame_index, x.subject, x.object, x.relation) <
                     std::tie(y.frame_index, y.subject, y.object, y.relation);
            });
  return changes;
}

Homography QuadToUnitSquare(const Quad& quad) {
  const Quad unit = {Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 0),
                     Eigen::Vector2d(1, 1), Eigen::Vector2d(0, 1)};
  return HomographyFromCorners(quad, unit);
}

std::string SurfaceGridPosition(const Box& box, const Homography& to_unit) {
  return GridCell(ProjectPoint(to_unit, box.BottomCenter()));
}

std::string SurfaceGridPosition(const Box& box, const Quad& quad) {
  return SurfaceGridPosition(box, QuadToUnitSquare(quad));
}

std::string DirectionWord(const Eigen::Vector2d& displacement) {
  if (displacement.norm() == 0.0) return "";
  static const char* const kWords[8] = {
      "right",    "forward and to the right", "forward",  "forward and to the left",
      "left",     "backward and to the left", "backward", "backward and to the right"};
  const double angle = std::atan2(displacement.y(), displacement.x());
  int sector = static_cast<int>(std::lround(angle / (std::numbers::pi / 4.0)));
  sector = ((sector % 8) + 8) % 8;
  return kWords[sector];
}

constexpr size_t kSettleFrames = 5;

std::vector<MovementEvent> DetectMovement(const ObjectTrack& track,
                                          const Episode& ep,
                                          const MovementOptions& options) {
  struct Interval {
    int64_t start, end;
    bool flow;
  };
  std::vector<Interval> intervals;
  const double d_move = options.disp_thresh * ep.width;
  const double d_rest = 0.25 * d_move;

  std::vector<size_t> present;
  for (size_t t = 0; t < track.frames.size(); ++t) {
    if (track.frames[t].present && track.frames[t].box) present.push_back(t);
  }
  if (present.size() >= 2) {
    const size_t m = present.size();
    std::vector<Eigen::Vector2d> raw(m), c(m);
    for (size_t k = 0; k < m; ++k) raw[k] = track.frames[present[k]].box->Center();
    for (size_t k = 0; k < m; ++k) {
      c[k] = (k == 0 || k + 1 == m) ? raw[k] : Median3(raw[k - 1], raw[k], raw[k + 1]);
    }
    Eigen::Vector2d anchor = c[0];
    size_t last_rest = 0, start = 0;
    bool moving = false;
    for (size_t k = 1; k < m; ++k) {
      if (!moving) {
        // A move that ended while still decelerating leaves the anchor
        // short of where the object settled; re-anchor once it holds still.
        if ((c[k] - anchor).norm() > d_rest && k + 1 >= kSettleFrames) {
          Eigen::Vector2d mean = Eigen::Vector2d::Zero();
          for (size_t q = k + 1 - kSettleFrames; q <= k; ++q) mean += c[q];
          mean /= static_cast<double>(kSettleFrames);
          bool settled = true;
          for (size_t q = k + 1 - kSettleFrames; q <= k; ++q) settled &= (c[q] - mean).norm() <= d_rest;
          if (settled) anchor = mean;
        }
        const double dist = (c[k] - anchor).norm();
        if (dist <= d_rest) last_rest = k;
        if (dist >= d_move) {
          moving = true;
          start = last_rest;
        }
      } else if (k >= start + 2 && (c[k] - c[k - 1]).norm() <= d_rest &&
                 (c[k - 1] - c[k - 2]).norm() <= d_rest) {
        intervals.push_back({ep.frames[present[start]].frame_index,
                             ep.frames[present[k - 2]].frame_index, false});
        moving = false;
        anchor = c[k];
        last_rest = k;
      }
    }
    if (moving) {
      intervals.push_back({ep.frames[present[start]].frame_index,
                           ep.frames[present.back()].frame_index, false});
    }
  }

  int run = 0;
  int64_t run_start = 0, run_last = 0;
  auto close_run = [&]() {
    if (run >= options.flow_min_frames) intervals.push_back({run_start, run_last, true});
    run = 0;
  };
  for (size_t t = 0; t < track.frames.size(); ++t) {
    const auto& flow = track.frames[t].flow;
    if (!flow) continue;
    if (*flow >= options.flow_thresh) {
      if (run == 0) run_start = ep.frames[t].frame_index;
      run_last = ep.frames[t].frame_index;
      ++run;
    } else {
      close_run();
    }
  }
  close_run();

  std::sort(intervals.begin(), intervals.end(), [](const Interval& a, const Interval& b) {
    return std::tie(a.start, a.end) < std::tie(b.start, b.end);
  });

  // Box nearest to `frame` looking backwards first, then forwards.
  auto box_at = [&](int64_t frame) -> std::optional<Box> {
    int64_t pos = ep.PositionOf(frame);
    for (int64_t p = pos; p >= 0; --p) {
      if (track.frames[p].present && track.frames[p].box) return track.frames[p].box;
    }
    for (size_t p = pos + 1; p < track.frames.size(); ++p) {
      if (track.frames[p].present && track.frames[p].box) return track.frames[p].box;
    }
    return std::nullopt;
  };

  std::vector<MovementEvent> events;
  size_t i = 0;
  while (i < intervals.size()) {
    int64_t start = intervals[i].start, end = intervals[i].end;
    std::optional<int64_t> flow_end;
    bool by_flow = false, by_disp = false;
    size_t j = i;
    for (; j < intervals.size() && intervals[j].start <= end; ++j) {
      end = std::max(end, intervals[j].end);
      if (intervals[j].flow) {
        by_flow = true;
        flow_end = std::max(flow_end.value_or(intervals[j].end), intervals[j].end);
      } else {
        by_disp = true;
      }
    }
    MovementEvent ev;
    ev.object_id = track.object_id;
    ev.start_frame = start;
    ev.end_frame = flow_end.value_or(end);
    ev.by_flow = by_flow;
    ev.by_displacement = by_disp;
    const auto b0 = box_at(start), b1 = box_at(ev.end_frame);
    if (b0 && b1) {
      ev.start_box = *b0;
      ev.end_box = *b1;
      const Eigen::Vector2d disp = b1->Center() - b0->Center();
      ev.magnitude = d_move > 0.0 ? disp.norm() / d_move : 0.0;
      if (disp.norm() >= 0.5 * d_move) ev.direction = DirectionWord(disp);
    }
    events.push_back(std::move(ev));
    i = j;
  }
  return events;
}

std::vector<StateEvent> SmoothStateSequence(
    const std::vector<int64_t>& frames,
    const std::vector<std::optional<std::string>>& states,
    const StateOptions& options) {
  std::vector<StateEvent> events;
  std::vector<std::string> window;
  std::optional<std::string> current;
  for (size_t i = 0; i < frames.size() && i < states.size(); ++i) {
    if (!states[i]) continue;
    window.push_back(*states[i]);
    if (static_cast<int>(window.size()) > options.window) window.erase(window.begin());
    std::map<std::string, int> votes;
    for (const std::string& s : window) ++votes[s];
    for (const auto& [state, count] : votes) {
      if (count < options.votes || state == current) continue;
      if (current) events.push_back({0, frames[i], *current, state});
      current = state;
      break;
    }
  }
  return events;
}

std::vector<StateEvent> DetectStateChanges(const ObjectTrack& track,
                                           const ObjectEntry& entry,
                                           const Episode& ep,
                                           const StateOptions& options) {
  if (entry.properties.states.size() < 2) return {};
  const std::set<std::string> allowed(entry.properties.states.begin(),
                                      entry.properties.states.end());
  std::vector<int64_t> frames;
  std::vector<std::optional<std::string>> states;
  for (size_t t = 0; t < ep.frames.size(); ++t) {
    const FrameRecord& f = ep.frames[t];
    const TrackFrame& tf = track.frames[t];
    frames.push_back(f.frame_index);
    states.emplace_back();
    if (!f.state_scores || !tf.box) continue;
    const StateScores* scores = nullptr;
    for (const std::string& name : entry.AllNames()) {
      auto it = f.state_scores->find(name);
      if (it != f.state_scores->end()) {
        scores = &it->second;
        break;
      }
    }
    if (scores == nullptr) continue;
    if (const Mask* robot = f.FindMask(kRobotMaskKey); robot != nullptr) {
      const Box crop = ClipBox(tf.box->Scaled(1.0 + options.crop_padding),
                               ep.width, ep.height);
      if (crop.IsValid() &&
          MaskIou(*robot, Mask::FromBox(ep.width, ep.height, crop)) >
              options.occlusion_iou) {
        continue;
      }
    }
    std::optional<std::string> best;
    double best_score = -1.0;
    for (const auto& [state, score] : *scores) {
      if (allowed.count(state) == 0) continue;
      if (score > best_score) {
        best = state;
        best_score = score;
      }
    }
    states.back() = best;
  }
  std::vector<StateEvent> events = SmoothStateSequence(frames, states, options);
  for (StateEvent& e : events) e.object_id = entry.object_id;
  return events;
}

double ObjectThreshold(const Box& box, double image_diagonal,
                       const GripperOptions& options) {
  const double size = std::sqrt(std::max(box.Area(), 0.0)) / image_diagonal;
  return std::clamp(options.tau_scale * size / options.tau_reference_size,
                    options.tau_min, options.tau_max);
}

double BoxMaskDistance(const Box& box, const Mask& mask) {
  double best = std::numeric_limits<double>::infinity();
  ForEachRowSpan(mask, [&](uint32_t y, uint32_t xb, uint32_t xe) {
    const double cy = y + 0.5;
    const double dy = std::max({0.0, box.y1 - cy, cy - box.y2});
    const double dx = std::max({0.0, box.x1 - (xe - 0.5), (xb + 0.5) - box.x2});
    best = std::min(best, std::hypot(dx, dy));
  });
  return best;
}

double DepthScaledDistance(double distance, double gripper_depth,
                           double object_depth) {
  const double lo = std::min(gripper_depth, object_depth);
  const double hi = std::max(gripper_depth, object_depth);
  if (lo <= 0.0) return distance;
  return distance * hi / lo;
}

std::vector<NearEvent> ScanNearRuns(const std::vector<int64_t>& frames,
                                    const std::vector<std::optional<double>>& distances,
                                    double tau, int near_frames) {
  std::vector<NearEvent> events;
  int count = 0;
  NearEvent current;
  auto close = [&]() {
    if (count >= near_frames) events.push_back(current);
    count = 0;
  };
  for (size_t i = 0; i < frames.size() && i < distances.size(); ++i) {
    if (!distances[i]) continue;
    if (*distances[i] < tau) {
      if (count == 0) current.run_start = frames[i];
      current.run_end = frames[i];
      if (++count == near_frames) current.frame_index = frames[i];
    } else {
      close();
    }
  }
  close();
  return events;
}

std::vector<size_t> GripperOpenings(const std::vector<std::optional<bool>>& closed) {
  std::vector<size_t> out;
  std::optional<bool> last;
  for (size_t i = 0; i < closed.size(); ++i) {
    if (!closed[i]) continue;
    if (last == true && !*closed[i]) out.push_back(i);
    last = closed[i];
  }
  return out;
}

EpisodeSignals ComputeSignals(const Episode& ep, const ObjectRegistry& registry,
                              const std::vector<ObjectTrack>& tracks,
                              const SignalOptions& options) {
  EpisodeSignals out;
  const size_t n_frames = ep.frames.size();
  const double diag = ep.Diagonal();
  const Intrinsics intr =
      options.intrinsics.value_or(Intrinsics::Default(ep.width, ep.height));

  std::vector<int64_t> frame_ids(n_frames);
  for (size_t t = 0; t < n_frames; ++t) {
    const FrameRecord& f = ep.frames[t];
    frame_ids[t] = f.frame_index;
    out.has_gripper |= f.gripper.has_value();
    out.has_flow |= f.flow_magnitude.has_value();
    out.has_state_scores |= f.state_scores.has_value();
    out.has_depth |= f.depth != nullptr;
  }

  std::vector<const ObjectEntry*> objects;
  for (const ObjectEntry& e : registry.entries) {
    if (!e.is_surface) objects.push_back(&e);
  }

  if (registry.surface_id) {
    const ObjectTrack& surface = tracks[*registry.surface_id];
    if (out.has_depth) {
      try {
        out.surface_frame = ComputeSurfaceFrame(surface, ep, intr, options.surface_cloud);
      } catch (const Error&) {
        out.surface_frame.reset();
      }
    }
    for (const TrackFrame& tf : surface.frames) {
      if (!tf.mask || tf.mask->empty()) continue;
      try {
        out.surface_quad = FitQuadrilateral(*tf.mask);
        QuadToUnitSquare(*out.surface_quad);
      } catch (const Error&) {
        out.surface_quad.reset();
      }
      break;
    }
  }

  // Per-frame object geometry.
  BackprojectOptions object_cloud{options.object_stride, 0, 0.0};
  std::vector<std::map<int, ObjectSnapshot>> snapshots(n_frames);
  std::shared_ptr<const DepthMap> depth;
  for (size_t t = 0; t < n_frames; ++t) {
    const FrameRecord& f = ep.frames[t];
    if (f.depth) depth = f.depth;
    for (const ObjectEntry* e : objects) {
      const TrackFrame& tf = tracks[e->object_id].frames[t];
      if (!tf.present || !tf.box) continue;
      ObjectSnapshot s;
      s.object_id = e->object_id;
      s.box = *tf.box;
      if (depth && out.surface_frame) {
        Mask fallback;
        const Mask* m = tf.mask.get();
        if (m == nullptr || m->empty()) {
          fallback = Mask::FromBox(ep.width, ep.height, ClipBox(s.box, ep.width, ep.height));
          m = &fallback;
        }
        PointCloud cloud = Backproject(*depth, intr, m, object_cloud);
        if (cloud.size() == 0) {
          cloud = Backproject(*depth, intr, m, BackprojectOptions{1, 0, 0.0});
        }
        if (cloud.size() > 0) {
          s.position = cloud.Centroid();
          std::vector<double> z;
          z.reserve(cloud.size());
          for (const auto& p : cloud.points) z.push_back(p.z());
          const auto [lo, hi] = std::minmax_element(z.begin(), z.end());
          s.depth_span = std::make_pair(*lo, *hi);
          s.median_depth = MedianInPlace(z);
        }
      }
      snapshots[t].emplace(e->object_id, std::move(s));
    }
  }

  // Relation graphs and their persistent changes.
  std::vector<SceneGraph> graphs(n_frames);
  for (size_t t = 0; t < n_frames; ++t) {
    std::vector<ObjectSnapshot> present;
    for (const auto& [id, s] : snapshots[t]) present.push_back(s);
    graphs[t] = BuildRelationGraph(frame_ids[t], present,
                                   out.surface_frame ? &*out.surface_frame : nullptr,
                                   registry, diag, options.relation);
  }

  // Movement.
  for (const ObjectEntry* e : objects) {
    if (!e->properties.movable) continue;
    for (MovementEvent& m : DetectMovement(tracks[e->object_id], ep, options.movement)) {
      out.movements.push_back(std::move(m));
    }
  }
  auto moving = [&](int id, int64_t frame) {
    for (const MovementEvent& m : out.movements) {
      if (m.object_id == id && frame >= m.start_frame - 1 &&
          frame <= m.end_frame + options.relation_persistence + 1) {
        return true;
      }
    }
    return false;
  };
  for (const RelationChange& c : TrackRelationChanges(graphs, options.relation_persistence)) {
    // A static subject only reacts to a moving partner; the mover owns it.
    if (!moving(c.subject, c.frame_index) && moving(c.object, c.frame_index)) continue;
    out.relation_changes.push_back(c);
  }

  // Relations gained by a movement, and grid cell changes.
  std::optional<Homography> to_unit;
  if (out.surface_quad) to_unit = QuadToUnitSquare(*out.surface_quad);
  auto graph_with = [&](int id, int64_t frame) -> const SceneGraph* {
    const int64_t pos = ep.PositionOf(frame);
    for (int64_t p = pos; p >= 0 && p > pos - 4; --p) {
      if (snapshots[p].count(id) > 0) return &graphs[p];
    }
    return nullptr;
  };
  for (const MovementEvent& m : out.movements) {
    const SceneGraph* before = graph_with(m.object_id, m.start_frame);
    const SceneGraph* after = graph_with(m.object_id, m.end_frame);
    if (after != nullptr) {
      for (const RelationEdge& edge : after->edges) {
        if (edge.subject != m.object_id || !IsDirectional(edge.relation)) continue;
        if (before != nullptr && before->Has(edge.subject, edge.relation, edge.object)) {
          continue;
        }
        out.moved_relations.push_back(
            {m.end_frame, m.object_id, edge.object, edge.relation});
      }
    }
    if (to_unit && m.start_box.IsValid() && m.end_box.IsValid()) {
      const std::string from = SurfaceGridPosition(m.start_box, *to_unit);
      const std::string to = SurfaceGridPosition(m.end_box, *to_unit);
      if (from != to) out.cell_moves.push_back({m.end_frame, m.object_id, from, to});
    }
  }

  // States.
  for (const ObjectEntry* e : objects) {
    for (StateEvent& s : DetectStateChanges(tracks[e->object_id], *e, ep, options.state)) {
      out.state_events.push_back(std::move(s));
    }
  }

  // Gripper proximity and openings.
  if (out.has_gripper) {
    std::map<int, std::vector<std::optional<double>>> distances;
    for (const ObjectEntry* e : objects) {
      distances[e->object_id].assign(n_frames, std::nullopt);
    }
    std::shared_ptr<const DepthMap> last_depth;
    for (size_t t = 0; t < n_frames; ++t) {
      const FrameRecord& f = ep.frames[t];
      if (f.depth) last_depth = f.depth;
      if (!f.gripper || !f.gripper->end_effector_box) continue;
      const Box& g = *f.gripper->end_effector_box;
      std::optional<double> zg;
      if (options.gripper.depth_scaling && last_depth) zg = MedianDepthInBox(*last_depth, g);
      for (const ObjectEntry* e : objects) {
        const TrackFrame& tf = tracks[e->object_id].frames[t];
        if (!tf.present || !tf.box) continue;
        double px = tf.mask && !tf.mask->empty()
                        ? BoxMaskDistance(g, *tf.mask)
                        : BoxMaskDistance(g, Mask::FromBox(ep.width, ep.height,
                                                           ClipBox(*tf.box, ep.width, ep.height)));
        if (!std::isfinite(px)) continue;
        double d = px / diag;
        if (zg) {
          auto snap = snapshots[t].find(e->object_id);
          std::optional<double> zo;
          if (snap != snapshots[t].end()) zo = snap->second.median_depth;
          if (!zo && last_depth) zo = MedianDepthInBox(*last_depth, *tf.box);
          if (zo) d = DepthScaledDistance(d, *zg, *zo);
        }
        distances[e->object_id][t] = d;
      }
    }
    for (const ObjectEntry* e : objects) {
      const ObjectTrack& track = tracks[e->object_id];
      std::vector<double> areas;
      for (const TrackFrame& tf : track.frames) {
        if (tf.present && tf.box) areas.push_back(tf.box->Area());
      }
      if (areas.empty()) continue;
      const double area = MedianInPlace(areas);
      const double side = std::sqrt(area);
      const double tau = ObjectThreshold(Box{0, 0, side, side}, diag, options.gripper);
      for (NearEvent& ev : ScanNearRuns(frame_ids, distances[e->object_id], tau,
                                        options.gripper.near_frames)) {
        ev.object_id = e->object_id;
        out.near_events.push_back(ev);
      }
    }
    std::sort(out.near_events.begin(), out.near_events.end(),
              [](const NearEvent& a, const NearEvent& b) {
                return std::tie(a.frame_index, a.object_id) < std::tie(b.frame_index, b.object_id);
              });

    std::vector<std::optional<bool>> closed(n_frames);
    for (size_t t = 0; t < n_frames; ++t) {
      if (ep.frames[t].gripper) closed[t] = ep.frames[t].gripper->closed;
    }
    for (size_t pos : GripperOpenings(closed)) {
      GripperCloseEvent ev{frame_ids[pos], -1};
      double best = std::numeric_limits<double>::infinity();
      for (size_t back = 0; back < 3 && back <= pos && ev.object_id < 0; ++back) {
        for (const ObjectEntry* e : objects) {
          const auto& d = distances[e->object_id][pos - back];
          if (d && *d < best) {
            best = *d;
            ev.object_id = e->object_id;
          }
        }
      }
      out.close_events.push_back(ev);
    }
  }
  return out;
}

}  // namespace playseg
