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
#include <vector>

#include <gtest/gtest.h>

#include "oracles.h"
#include "playseg/box.h"
#include "playseg/error.h"
#include "playseg/geometry.h"
#include "playseg/mask.h"
#include "suites.h"

namespace playseg {
namespace {

TEST(IouTest, IdenticalAndDisjoint) {
  const Box a{0, 0, 2, 2};
  EXPECT_DOUBLE_EQ(Iou(a, a), 1.0);
  EXPECT_DOUBLE_EQ(Iou(a, {5, 5, 6, 6}), 0.0);
  // Touching edges share no area.
  EXPECT_DOUBLE_EQ(Iou(a, {2, 0, 4, 2}), 0.0);
}

TEST(IouTest, HalfShifted) {
  EXPECT_DOUBLE_EQ(Iou({0, 0, 2, 2}, {1, 0, 3, 2}), 1.0 / 3.0);
}

TEST(MaskTest, IouSelfComplementAndPartial) {
  const std::vector<uint8_t> a{1, 1, 0, 0, 1, 1, 0, 0};
  const std::vector<uint8_t> c{0, 0, 1, 1, 0, 0, 1, 1};
  const Mask ma = Mask::FromDense(4, 2, a);
  EXPECT_DOUBLE_EQ(MaskIou(ma, ma), 1.0);
  EXPECT_DOUBLE_EQ(MaskIou(ma, Mask::FromDense(4, 2, c)), 0.0);
  // 4 pixels against 2, one shared.
  const std::vector<uint8_t> b{0, 1, 1, 0, 0, 0, 0, 0};
  EXPECT_DOUBLE_EQ(MaskIou(ma, Mask::FromDense(4, 2, b)), 1.0 / 5.0);
}

TEST(MaskTest, IouDimensionMismatchThrows) {
  EXPECT_THROW(MaskIou(Mask(2, 2), Mask(3, 2)), ValidationError);
}

TEST(MaskTest, RunsCoalesce) {
  const Mask m = Mask::FromRuns(4, 4, {{4, 2}, {0, 2}, {2, 2}});
  ASSERT_EQ(m.runs().size(), 1u);
  EXPECT_EQ(m.runs()[0], (playseg::Run{0, 6}));
  EXPECT_THROW(Mask::FromRuns(4, 4, {{0, 3}, {2, 2}}), ValidationError);
  EXPECT_THROW(Mask::FromRuns(4, 4, {{14, 3}}), ValidationError);
}

TEST(MaskTest, SidecarRoundTrip) {
  const Mask m = Mask::FromBox(7, 5, {1, 1, 4, 3});
  EXPECT_EQ(DecodeMaskSidecar(EncodeMaskSidecar(m)), m);
  EXPECT_EQ(m.Area(), 6u);
  EXPECT_EQ(m.Bounds(), (Box{1, 1, 4, 3}));
}

TEST(ComponentsTest, SingleBlob) {
  const auto comps = ConnectedComponents(Mask::FromBox(6, 6, {1, 1, 4, 4}));
  ASSERT_EQ(comps.size(), 1u);
  EXPECT_EQ(comps[0].second, 9u);
}

TEST(ComponentsTest, DiagonalTouchIsTwoComponents) {
  const std::vector<uint8_t> px{1, 0, 0, 1};
  EXPECT_EQ(ConnectedComponents(Mask::FromDense(2, 2, px)).size(), 2u);
}

TEST(ComponentsTest, LShapeAndDot) {
  // L of 5 pixels and a single dot far away.
  std::vector<uint8_t> px(8 * 8, 0);
  for (int y = 0; y < 4; ++y) px[y * 8 + 1] = 1;
  px[3 * 8 + 2] = 1;
  px[7 * 8 + 7] = 1;
  const auto comps = ConnectedComponents(Mask::FromDense(8, 8, px));
  ASSERT_EQ(comps.size(), 2u);
  EXPECT_EQ(comps[0].second, 5u);
  EXPECT_EQ(comps[1].second, 1u);
  const auto ref = [&] {
    std::vector<std::pair<Mask, uint64_t>> ref;
    for (const auto& c : oracle::FloodComponents(px, 8, 8)) {
      std::vector<uint8_t> d(64, 0);
      for (uint32_t i : c) d[i] = 1;
      ref.emplace_back(Mask::FromDense(8, 8, d), c.size());
    }
    return ref;
  }();
  EXPECT_EQ(comps, ref);
}

std::vector<Eigen::VectorXd> Points1d(const std::vector<double>& xs) {
  std::vector<Eigen::VectorXd> out;
  for (double x : xs) out.push_back(Eigen::VectorXd::Constant(1, x));
  return out;
}

TEST(DbscanTest, IdenticalPointsOneCluster) {
  EXPECT_EQ(Dbscan(Points1d({3, 3, 3}), 0.1, 1), (std::vector<int>{0, 0, 0}));
}

TEST(DbscanTest, SinglePointIsNoise) {
  EXPECT_EQ(Dbscan(Points1d({1}), 1.0, 2), (std::vector<int>{-1}));
}

TEST(DbscanTest, TwoClusters) {
  EXPECT_EQ(Dbscan(Points1d({0, 0.1, 0.2, 10, 10.1}), 0.5, 2),
            (std::vector<int>{0, 0, 0, 1, 1}));
}

PointCloud PlaneCloud(double z) {
  PointCloud c;
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) c.points.emplace_back(0.1 * i - 0.2, 0.1 * j - 0.2, z);
  }
  return c;
}

TEST(FitPlaneTest, HorizontalPlaneFacesCamera) {
  const Plane p = FitPlane(PlaneCloud(1.0));
  EXPECT_NEAR(p.normal.x(), 0.0, 1e-12);
  EXPECT_NEAR(p.normal.y(), 0.0, 1e-12);
  EXPECT_NEAR(p.normal.z(), -1.0, 1e-12);
  EXPECT_NEAR(p.offset, -1.0, 1e-12);
}

TEST(FitPlaneTest, OutlierIgnored) {
  PointCloud c = PlaneCloud(1.0);
  c.points.emplace_back(0.0, 0.0, 50.0);
  const Plane p = FitPlane(c);
  const Plane clean = FitPlane(PlaneCloud(1.0));
  EXPECT_LT((p.normal - clean.normal).norm(), 1e-6);
  EXPECT_NEAR(p.offset, clean.offset, 1e-6);
}

TEST(FitPlaneTest, CollinearIsDegenerate) {
  PointCloud c;
  for (int i = 0; i < 3; ++i) c.points.emplace_back(i, 2.0 * i, 1.0);
  EXPECT_THROW(FitPlane(c), DegenerateError);
}

TEST(FitQuadTest, AxisAlignedRectangle) {
  const Quad q = FitQuadrilateral(Mask::FromBox(40, 50, {10, 20, 30, 40}));
  EXPECT_EQ(q[0], Eigen::Vector2d(10, 20));
  EXPECT_EQ(q[1], Eigen::Vector2d(29, 20));
  EXPECT_EQ(q[2], Eigen::Vector2d(29, 39));
  EXPECT_EQ(q[3], Eigen::Vector2d(10, 39));
}

TEST(FitQuadTest, RotatedSquare) {
  // Diamond with corners at (top, right, bottom, left) of a 60x60 image.
  const Quad truth{Eigen::Vector2d(30, 8), Eigen::Vector2d(52, 30), Eigen::Vector2d(30, 52),
                   Eigen::Vector2d(8, 30)};
  std::vector<uint8_t> px(60 * 60, 0);
  for (int y = 0; y < 60; ++y) {
    for (int x = 0; x < 60; ++x) px[y * 60 + x] = std::abs(x - 30) + std::abs(y - 30) <= 22;
  }
  const Quad q = FitQuadrilateral(Mask::FromDense(60, 60, px));
  // Every true corner has a fitted corner within a pixel.
  for (const auto& t : truth) {
    double best = 1e9;
    for (const auto& c : q) best = std::min(best, (c - t).norm());
    EXPECT_LE(best, 1.0);
  }
}

TEST(FitQuadTest, EmptyMaskThrows) {
  EXPECT_THROW(FitQuadrilateral(Mask(4, 4)), DegenerateError);
}

Quad UnitSquare() {
  return {Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 0), Eigen::Vector2d(1, 1), Eigen::Vector2d(0, 1)};
}

TEST(HomographyTest, IdentityOnSameQuad) {
  const Homography h = HomographyFromCorners(UnitSquare(), UnitSquare());
  EXPECT_LT((h.matrix() - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff(), 1e-12);
  const Eigen::Vector2d p(0.3, 0.7);
  EXPECT_LT((ProjectPoint(h, p) - p).norm(), 1e-12);
}

TEST(HomographyTest, CollinearSourceThrows) {
  Quad q = UnitSquare();
  q[2] = Eigen::Vector2d(2, 0);
  EXPECT_THROW(HomographyFromCorners(q, UnitSquare()), DegenerateError);
}

TEST(HomographyTest, TranslationShifts) {
  Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
  m(0, 2) = 3.0;
  m(1, 2) = -2.0;
  const Eigen::Vector2d p = ProjectPoint(Homography(m), {1.0, 1.0});
  EXPECT_DOUBLE_EQ(p.x(), 4.0);
  EXPECT_DOUBLE_EQ(p.y(), -1.0);
}

TEST(HomographyTest, PointAtInfinityThrows) {
  Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
  m(2, 0) = 1.0;
  EXPECT_THROW(ProjectPoint(Homography(m), {-1.0, 0.0}), DegenerateError);
}

TEST(GridCellTest, Examples) {
  EXPECT_EQ(GridCell({0.5, 0.5}), "center");
  EXPECT_EQ(GridCell({0.1, 0.9}), "bottom left");
  EXPECT_EQ(GridCell({1.0 / 3.0, 2.0 / 3.0}), "bottom center");
  EXPECT_EQ(GridCell({-3.0, 7.0}), "bottom left");
  EXPECT_EQ(GridCell({0.9, 0.1}), "top right");
}

TEST(BackprojectTest, PrincipalPoint) {
  DepthMap d{3, 3, std::vector<float>(9, 0.5f)};
  d.values[4] = 2.0f;
  BackprojectOptions opt;
  opt.outlier_k = 0;
  const PointCloud c = Backproject(d, {7.0, 9.0, 1.0, 1.0}, nullptr, opt);
  ASSERT_EQ(c.size(), 9u);
  EXPECT_EQ(c.points[4], Eigen::Vector3d(0, 0, 2));
  // Per-pixel formula on a corner.
  EXPECT_NEAR(c.points[0].x(), (0 - 1.0) / 7.0 * 0.5, 1e-15);
  EXPECT_NEAR(c.points[0].y(), (0 - 1.0) / 9.0 * 0.5, 1e-15);
}

TEST(BackprojectTest, ConstantDepthIsPlanar) {
  DepthMap d{16, 12, std::vector<float>(16 * 12, 0.75f)};
  const PointCloud c = Backproject(d, Intrinsics::Default(16, 12));
  const Plane p = FitPlane(c);
  EXPECT_NEAR(p.normal.z(), -1.0, 1e-9);
}

TEST(NumericsOracleSuite, AllOpsAgree) {
  const auto r = testing::RunNumericsSuite(7, 300);
  for (const auto& op : r.ops) {
    EXPECT_EQ(op.mismatches, 0u) << op.op;
    EXPECT_LT(op.max_error, 1e-9) << op.op;
    EXPECT_EQ(op.instances, 300u) << op.op;
  }
}

}  // namespace
}  // namespace playseg
