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

#ifndef PLAYSEG_GEOMETRY_H_
#define PLAYSEG_GEOMETRY_H_

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "playseg/box.h"
#include "playseg/mask.h"

namespace playseg {

// Relative (normalized) depth map, one value in [0, 1] per pixel, row-major.
struct DepthMap {
  uint32_t width = 0;
  uint32_t height = 0;
  std::vector<float> values;

  float At(uint32_t x, uint32_t y) const { return values[y * width + x]; }
  friend bool operator==(const DepthMap&, const DepthMap&) = default;
};

std::string EncodeDepthSidecar(const DepthMap& d);
DepthMap DecodeDepthSidecar(const std::string& bytes);

struct Intrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;

  // fx = fy = 0.8 * width, principal point at the image center.
  static Intrinsics Default(uint32_t width, uint32_t height);
};

struct PointCloud {
  std::vector<Eigen::Vector3d> points;
  // Empty, or one id per point.
  std::vector<int> object_ids;

  size_t size() const { return points.size(); }
  Eigen::Vector3d Centroid() const;
};

// n . p = offset with |n| = 1.
struct Plane {
  Eigen::Vector3d normal = Eigen::Vector3d::UnitZ();
  double offset = 0.0;

  double SignedDistance(const Eigen::Vector3d& p) const {
    return normal.dot(p) - offset;
  }
};

// Projective map between image planes; h33 normalized to 1 on construction
// from correspondences.
class Homography {
 public:
  Homography() : m_(Eigen::Matrix3d::Identity()) {}
  // Throws DegenerateError when |det| <= 1e-12.
  explicit Homography(const Eigen::Matrix3d& m);

  const Eigen::Matrix3d& matrix() const { return m_; }

 private:
  Eigen::Matrix3d m_;
};

using Quad = std::array<Eigen::Vector2d, 4>;

// Standard DBSCAN with Euclidean metric. Returns one label per point; -1 is
// noise, clusters are numbered 0.. in the order they are discovered while
// scanning points in input order.
std::vector<int> Dbscan(std::span<const Eigen::VectorXd> points, double eps,
                        int min_pts);

struct PlaneFitOptions {
  // Second-round refit keeps points within this distance of the first fit.
  double inlier_distance = 0.05;
  // Gross-outlier trim before the first round, in robust sigmas.
  double trim_sigmas = 3.0;
};

// Robust total-least-squares plane with the normal oriented toward the camera
// origin. Throws DegenerateError for fewer than 3 points or collinear input.
Plane FitPlane(const PointCloud& cloud, const PlaneFitOptions& options = {});

// Plain total least squares on the given points, camera-facing normal.
Plane FitPlaneTls(std::span<const Eigen::Vector3d> points);

// Convex hull of the integer pixel centers of the mask's largest component,
// reduced to four vertices by repeatedly removing the edge whose removal adds
// the least area. Corners are returned clockwise on screen starting from the
// top-left one. Throws DegenerateError for an empty mask.
Quad FitQuadrilateral(const Mask& m);

// Convex hull of 2-D points, counter-clockwise in standard math orientation,
// collinear points dropped.
std::vector<Eigen::Vector2d> ConvexHull(std::vector<Eigen::Vector2d> points);

// Solves the 8x8 DLT system with h33 = 1 so that quad[i] maps to target[i].
Homography HomographyFromCorners(const Quad& quad, const Quad& target);

// Throws DegenerateError when the transformed point lies at infinity.
Eigen::Vector2d ProjectPoint(const Homography& h, const Eigen::Vector2d& p);

// 3x3 grid label for a normalized point, clamped into [0,1]^2. Rows by y
// (top, center, bottom), columns by x (left, center, right); cell boundaries
// at exactly 1/3 and 2/3 belong to the higher cell; "center center" is
// "center".
std::string GridCell(const Eigen::Vector2d& p);
// All nine labels in row-major order.
const std::array<std::string, 9>& GridCellLabels();

struct BackprojectOptions {
  uint32_t stride = 1;
  // Statistical outlier removal: drop points whose mean distance to their
  // k nearest neighbours exceeds mean + std_ratio * stddev. k = 0 disables.
  int outlier_k = 8;
  double outlier_std_ratio = 2.0;
};

// p = ((u - cx) / fx * z, (v - cy) / fy * z, z) for every (masked) pixel on
// the stride lattice.
PointCloud Backproject(const DepthMap& depth, const Intrinsics& intrinsics,
                       const Mask* mask = nullptr,
                       const BackprojectOptions& options = {});

// Removes statistical outliers in place; returns the number removed.
size_t RemoveStatisticalOutliers(PointCloud& cloud, int k, double std_ratio);

}  // namespace playseg

#endif  // PLAYSEG_GEOMETRY_H_
