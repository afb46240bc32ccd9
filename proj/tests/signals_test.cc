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

#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Geometry>

#include <gtest/gtest.h>

#include "oracles.h"
#include "playseg/error.h"
#include "playseg/fusion.h"
#include "playseg/geometry.h"
#include "playseg/signals.h"

namespace playseg {
namespace {

// Episode of `n` empty frames and a track whose box centers follow `xs`.
struct Scene {
  Episode ep;
  ObjectTrack track;
};

Scene TrackAlong(const std::vector<double>& xs, uint32_t width = 100) {
  Scene s;
  s.ep.episode_id = "m";
  s.ep.width = width;
  s.ep.height = 100;
  for (size_t i = 0; i < xs.size(); ++i) {
    FrameRecord f;
    f.frame_index = static_cast<int64_t>(i);
    s.ep.frames.push_back(f);
    TrackFrame tf;
    tf.present = true;
    tf.box = Box{xs[i] - 5, 5, xs[i] + 5, 15};
    s.track.frames.push_back(tf);
  }
  return s;
}

TEST(DetectMovementTest, StaticBoxNoEvents) {
  Scene s = TrackAlong(std::vector<double>(12, 10.0));
  for (auto& f : s.track.frames) f.flow = 0.0;
  EXPECT_TRUE(DetectMovement(s.track, s.ep).empty());
}

TEST(DetectMovementTest, RightwardDisplacement) {
  Scene s = TrackAlong({10, 10, 10, 15, 20, 25, 30, 35, 40, 40, 40, 40});
  MovementOptions opt;
  opt.disp_thresh = 0.05;
  const auto events = DetectMovement(s.track, s.ep, opt);
  ASSERT_EQ(events.size(), 1u);
  EXPECT_EQ(events[0].direction, "right");
  EXPECT_TRUE(events[0].by_displacement);
  EXPECT_FALSE(events[0].by_flow);
  EXPECT_NEAR(events[0].end_box.Center().x() - events[0].start_box.Center().x(), 30.0, 1e-12);
}

TEST(DetectMovementTest, FlowPath) {
  Scene s = TrackAlong({10, 10, 10.5, 11, 11.5, 12, 12, 12});
  for (auto& f : s.track.frames) f.flow = 0.0;
  for (int t = 2; t < 6; ++t) s.track.frames[t].flow = 6.0;
  MovementOptions opt;
  opt.flow_thresh = 5.0;
  const auto events = DetectMovement(s.track, s.ep, opt);
  ASSERT_EQ(events.size(), 1u);
  EXPECT_TRUE(events[0].by_flow);
  EXPECT_FALSE(events[0].by_displacement);
  EXPECT_EQ(events[0].start_frame, 2);
  EXPECT_EQ(events[0].end_frame, 5);
}

TEST(DetectMovementTest, SlowTailDoesNotJoinTheNextMove) {
  // Decelerates to a stop at 26, rests, then moves again much later.
  std::vector<double> xs{10, 10, 10, 13, 16, 19, 22, 23, 24, 25, 25.5, 26};
  xs.resize(40, 26.0);
  for (double x = 30; x <= 50; x += 4) xs.push_back(x);
  xs.resize(50, 50.0);
  Scene s = TrackAlong(xs);
  const auto events = DetectMovement(s.track, s.ep);
  ASSERT_EQ(events.size(), 2u);
  EXPECT_LE(events[0].end_frame, 11);
  EXPECT_GE(events[1].start_frame, 35);
}

TEST(DirectionWordTest, Sectors) {
  EXPECT_EQ(DirectionWord({1, 0}), "right");
  EXPECT_EQ(DirectionWord({-1, 0}), "left");
  EXPECT_EQ(DirectionWord({0, 1}), "forward");
  EXPECT_EQ(DirectionWord({-1, -1}), "backward and to the left");
  EXPECT_EQ(DirectionWord({0, 0}), "");
}

TEST(SurfaceFrameTest, FlatSurfaceAxes) {
  Plane p;
  p.normal = {0, 0, -1};
  p.offset = -1;
  const SurfaceFrame f = MakeSurfaceFrame(p, {0, 0, 1});
  EXPECT_LT((f.up - Eigen::Vector3d(0, 0, -1)).norm(), 1e-12);
  EXPECT_LT((f.right - Eigen::Vector3d(1, 0, 0)).norm(), 1e-12);
}

TEST(SurfaceFrameTest, TiltedPlaneRecovered) {
  const Eigen::Vector3d n = Eigen::Vector3d(0.2, -0.9, -0.4).normalized();
  const Eigen::Vector3d c(0.1, 0.3, 2.0);
  const Eigen::Vector3d u = n.unitOrthogonal(), v = n.cross(u);
  PointCloud cloud;
  for (int i = -5; i <= 5; ++i) {
    for (int j = -5; j <= 5; ++j) cloud.points.push_back(c + 0.05 * i * u + 0.05 * j * v);
  }
  const SurfaceFrame f = MakeSurfaceFrame(FitPlane(cloud), cloud.Centroid());
  // n faces the camera: n . (0 - c) > 0.
  ASSERT_GT(n.dot(-c), 0.0);
  EXPECT_LT(std::acos(std::min(1.0, f.up.dot(n))), 1e-6);
  EXPECT_NEAR(f.up.dot(f.front), 0.0, 1e-12);
  EXPECT_NEAR(f.right.dot(f.front), 0.0, 1e-12);
}

TEST(SurfaceFrameTest, MissingDepthThrows) {
  Episode ep;
  ep.episode_id = "d";
  ep.width = ep.height = 20;
  FrameRecord fr;
  fr.detections.push_back({"table", {0, 0, 20, 20}, 0.9, {}});
  fr.masks.push_back({"table", std::make_shared<Mask>(Mask::FromBox(20, 20, {0, 0, 20, 20}))});
  ep.frames.push_back(fr);
  ObjectTrack t;
  TrackFrame tf;
  tf.present = true;
  tf.box = Box{0, 0, 20, 20};
  tf.mask = fr.masks[0].mask;
  t.frames.push_back(tf);
  try {
    ComputeSurfaceFrame(t, ep, Intrinsics::Default(20, 20));
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("depth required"), std::string::npos);
  }
}

ObjectRegistry TwoObjects(bool second_is_container = false) {
  ObjectRegistry r;
  ObjectEntry a, b;
  a.object_id = 0;
  a.canonical_name = "a";
  b.object_id = 1;
  b.canonical_name = "b";
  b.properties.is_container = second_is_container;
  r.entries = {a, b};
  return r;
}

TEST(RelationGraphTest, RightOfAndInverse) {
  const double diag = 100.0;
  ObjectSnapshot a{0, {45, 40, 55, 50}, {}, {}, {}};
  ObjectSnapshot b{1, {25, 40, 35, 50}, {}, {}, {}};
  RelationOptions opt;
  opt.tau_rel = 0.05;
  const SceneGraph g = BuildRelationGraph(0, {a, b}, nullptr, TwoObjects(), diag, opt);
  EXPECT_TRUE(g.Has(0, Relation::kRightOf, 1));
  EXPECT_TRUE(g.Has(1, Relation::kLeftOf, 0));
  EXPECT_FALSE(g.Has(0, Relation::kNextTo, 1));
}

TEST(RelationGraphTest, InsideContainer) {
  ObjectSnapshot cup{0, {42, 42, 48, 48}, {}, 0.5, {}};
  ObjectSnapshot bowl{1, {38, 38, 52, 52}, {}, {}, std::make_pair(0.4, 0.6)};
  const SceneGraph g = BuildRelationGraph(0, {cup, bowl}, nullptr, TwoObjects(true), 100.0);
  EXPECT_TRUE(g.Has(0, Relation::kInside, 1));
  cup.median_depth = 0.9;
  EXPECT_FALSE(BuildRelationGraph(0, {cup, bowl}, nullptr, TwoObjects(true), 100.0)
                   .Has(0, Relation::kInside, 1));
}

TEST(RelationGraphTest, SingleObjectNoEdges) {
  const SceneGraph g = BuildRelationGraph(0, {{0, {1, 1, 5, 5}, {}, {}, {}}}, nullptr, TwoObjects(), 100.0);
  EXPECT_TRUE(g.edges.empty());
}

TEST(RelationChangesTest, PersistentChangeReportedAtRunStart) {
  std::vector<SceneGraph> graphs;
  for (int f = 0; f < 10; ++f) {
    SceneGraph g;
    g.frame_index = f;
    g.nodes = {0, 1};
    g.edges.push_back({0, f < 4 ? Relation::kLeftOf : Relation::kRightOf, 1});
    graphs.push_back(g);
  }
  const auto changes = TrackRelationChanges(graphs, 3);
  ASSERT_EQ(changes.size(), 1u);
  EXPECT_EQ(changes[0], (RelationChange{4, 0, 1, Relation::kRightOf}));
}

Quad SkewedQuad() {
  return {Eigen::Vector2d(20, 10), Eigen::Vector2d(80, 12), Eigen::Vector2d(95, 90), Eigen::Vector2d(5, 85)};
}

TEST(SurfaceGridTest, CenteredObject) {
  const Quad sq{Eigen::Vector2d(0, 0), Eigen::Vector2d(90, 0), Eigen::Vector2d(90, 90), Eigen::Vector2d(0, 90)};
  EXPECT_EQ(SurfaceGridPosition(Box{40, 40, 50, 50}, sq), "center");
}

TEST(SurfaceGridTest, WarpedMatchesHandProjection) {
  const Quad q = SkewedQuad();
  std::array<std::array<double, 2>, 4> src, dst{{{0, 0}, {1, 0}, {1, 1}, {0, 1}}};
  for (int k = 0; k < 4; ++k) src[k] = {q[k].x(), q[k].y()};
  bool ok = false;
  const auto h = oracle::SolveHomography(src, dst, &ok);
  ASSERT_TRUE(ok);
  for (const Box& b : {Box{20, 20, 30, 30}, Box{60, 50, 70, 80}, Box{40, 30, 50, 40}}) {
    const auto p = oracle::Project(h, b.BottomCenter().x(), b.BottomCenter().y());
    EXPECT_EQ(SurfaceGridPosition(b, q), oracle::GridCell(p[0], p[1]));
  }
}

TEST(SurfaceGridTest, OutsideClampsToBoundary) {
  EXPECT_EQ(SurfaceGridPosition(Box{200, 200, 210, 210}, SkewedQuad()), "bottom right");
  EXPECT_EQ(SurfaceGridPosition(Box{-50, -60, -40, -50}, SkewedQuad()), "top left");
}

std::vector<int64_t> Iota(size_t n) {
  std::vector<int64_t> v(n);
  for (size_t i = 0; i < n; ++i) v[i] = static_cast<int64_t>(i);
  return v;
}

TEST(StateSmoothingTest, PersistentFlip) {
  std::vector<std::optional<std::string>> s;
  for (int i = 0; i < 8; ++i) s.push_back("open");
  for (int i = 0; i < 8; ++i) s.push_back("closed");
  const auto events = SmoothStateSequence(Iota(s.size()), s);
  ASSERT_EQ(events.size(), 1u);
  EXPECT_EQ(events[0].from_state, "open");
  EXPECT_EQ(events[0].to_state, "closed");
}

TEST(StateSmoothingTest, OneFrameFlickerIgnored) {
  std::vector<std::optional<std::string>> s(12, "open");
  s[6] = "closed";
  EXPECT_TRUE(SmoothStateSequence(Iota(s.size()), s).empty());
}

TEST(StateSmoothingTest, OccludedTransitionEmitsAtFirstVisibleConfirmation) {
  std::vector<std::optional<std::string>> s(20, "open");
  for (int i = 6; i < 12; ++i) s[i] = std::nullopt;
  for (int i = 12; i < 20; ++i) s[i] = "closed";
  const auto events = SmoothStateSequence(Iota(s.size()), s);
  ASSERT_EQ(events.size(), 1u);
  // Third visible "closed" sample wins the 5-sample majority.
  EXPECT_EQ(events[0].frame_index, 14);
}

TEST(NearRunsTest, Examples) {
  const auto one = ScanNearRuns(Iota(5), {0.10, 0.04, 0.04, 0.04, 0.20}, 0.05);
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one[0].frame_index, 3);
  EXPECT_TRUE(ScanNearRuns(Iota(3), {0.3, 0.2, 0.1}, 0.05).empty());
  const auto two = ScanNearRuns(Iota(9), {0.01, 0.01, 0.01, 0.5, 0.5, 0.02, 0.02, 0.02, 0.02}, 0.05);
  ASSERT_EQ(two.size(), 2u);
  EXPECT_EQ(two[0].frame_index, 2);
  EXPECT_EQ(two[1].frame_index, 7);
  // Absent samples neither extend nor break a run.
  const auto gap = ScanNearRuns(Iota(4), {0.01, std::nullopt, 0.01, 0.01}, 0.05);
  ASSERT_EQ(gap.size(), 1u);
  EXPECT_EQ(gap[0].frame_index, 3);
}

TEST(GripperOpeningsTest, Examples) {
  EXPECT_EQ(GripperOpenings({false, true, true, false}), (std::vector<size_t>{3}));
  EXPECT_TRUE(GripperOpenings({false, false, false}).empty());
  EXPECT_TRUE(GripperOpenings({false, true, true}).empty());
  EXPECT_EQ(GripperOpenings({true, std::nullopt, false}), (std::vector<size_t>{2}));
}

TEST(ProximityTest, DepthScalingAndThresholdClamp) {
  EXPECT_DOUBLE_EQ(DepthScaledDistance(0.1, 0.5, 0.5), 0.1);
  EXPECT_DOUBLE_EQ(DepthScaledDistance(0.1, 0.4, 0.8), 0.2);
  EXPECT_DOUBLE_EQ(DepthScaledDistance(0.1, 0.8, 0.4), 0.2);
  GripperOptions opt;
  EXPECT_DOUBLE_EQ(ObjectThreshold({0, 0, 1, 1}, 100.0, opt), opt.tau_min);
  EXPECT_DOUBLE_EQ(ObjectThreshold({0, 0, 100, 100}, 100.0, opt), opt.tau_max);
  const Mask m = Mask::FromBox(20, 20, {10, 0, 11, 1});
  // The pixel at column 10 has its center at x = 10.5.
  EXPECT_DOUBLE_EQ(BoxMaskDistance({0, 0, 5, 1}, m), 5.5);
}

}  // namespace
}  // namespace playseg
