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

#include "playseg/geometry.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>

#include <Eigen/Dense>

#include "playseg/error.h"

namespace playseg {
namespace {

void PutU32(std::string& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

uint32_t GetU32(const std::string& in, size_t offset) {
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    v |= static_cast<uint32_t>(static_cast<uint8_t>(in[offset + i])) << (8 * i);
  }
  return v;
}

double Cross(const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  return a.x() * b.y() - a.y() * b.x();
}

// Median of a copy; even sizes average the two middle elements.
double Median(std::vector<double> v) {
  const size_t n = v.size();
  const size_t mid = n / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  const double hi = v[mid];
  if (n % 2 == 1) return hi;
  const double lo = *std::max_element(v.begin(), v.begin() + mid);
  return 0.5 * (lo + hi);
}

Plane OrientTowardCamera(Eigen::Vector3d normal, double offset) {
  // The camera sits at the origin; a camera-facing normal satisfies
  // n . (0 - p) > 0, i.e. offset < 0.
  if (offset > 0.0 || (offset == 0.0 && normal.z() > 0.0)) {
    normal = -normal;
    offset = -offset;
  }
  return {normal, offset};
}

}  // namespace

Box Box::Scaled(double factor) const {
  const Eigen::Vector2d c = Center();
  const double hw = 0.5 * Width() * factor, hh = 0.5 * Height() * factor;
  return {c.x() - hw, c.y() - hh, c.x() + hw, c.y() + hh};
}

double IntersectionArea(const Box& a, const Box& b) {
  const double w = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  const double h = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  if (w <= 0.0 || h <= 0.0) return 0.0;
  return w * h;
}

double Iou(const Box& a, const Box& b) {
  const double inter = IntersectionArea(a, b);
  const double uni = a.Area() + b.Area() - inter;
  if (uni <= 0.0) return 0.0;
  return inter / uni;
}

std::string EncodeDepthSidecar(const DepthMap& d) {
  std::string out;
  out.reserve(8 + 4 * d.values.size());
  PutU32(out, d.width);
  PutU32(out, d.height);
  for (float v : d.values) PutU32(out, std::bit_cast<uint32_t>(v));
  return out;
}

DepthMap DecodeDepthSidecar(const std::string& bytes) {
  if (bytes.size() < 8) throw ParseError("depth sidecar shorter than header", 0);
  DepthMap d;
  d.width = GetU32(bytes, 0);
  d.height = GetU32(bytes, 4);
  const size_t n = static_cast<size_t>(d.width) * d.height;
  if (bytes.size() != 8 + 4 * n) {
    throw ParseError("depth sidecar size does not match dimensions", 0);
  }
  d.values.resize(n);
  for (size_t i = 0; i < n; ++i) {
    d.values[i] = std::bit_cast<float>(GetU32(bytes, 8 + 4 * i));
  }
  return d;
}

Intrinsics Intrinsics::Default(uint32_t width, uint32_t height) {
  const double f = 0.8 * width;
  return {f, f, 0.5 * width, 0.5 * height};
}

Eigen::Vector3d PointCloud::Centroid() const {
  Eigen::Vector3d c = Eigen::Vector3d::Zero();
  if (points.empty()) return c;
  for (const auto& p : points) c += p;
  return c / static_cast<double>(points.size());
}

Homography::Homography(const Eigen::Matrix3d& m) : m_(m) {
  if (std::abs(m.determinant()) <= 1e-12) {
    throw DegenerateError("homography is not invertible");
  }
}

std::vector<int> Dbscan(std::span<const Eigen::VectorXd> points, double eps,
                        int min_pts) {
  const size_t n = points.size();
  const double eps2 = eps * eps;
  std::vector<std::vector<size_t>> neighbors(n);
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < n; ++j) {
      if ((points[i] - points[j]).squaredNorm() <= eps2) neighbors[i].push_back(j);
    }
  }
  constexpr int kUnvisited = -2;
  constexpr int kNoise = -1;
  std::vector<int> labels(n, kUnvisited);
  int next_cluster = 0;
  std::deque<size_t> frontier;
  for (size_t i = 0; i < n; ++i) {
    if (labels[i] != kUnvisited) continue;
    if (static_cast<int>(neighbors[i].size()) < min_pts) {
      labels[i] = kNoise;
      continue;
    }
    const int cluster = next_cluster++;
    labels[i] = cluster;
    frontier.assign(neighbors[i].begin(), neighbors[i].end());
    while (!frontier.empty()) {
      const size_t q = frontier.front();
      frontier.pop_front();
      if (labels[q] == kNoise) labels[q] = cluster;  // Border point.
      if (labels[q] != kUnvisited) continue;
      labels[q] = cluster;
      if (static_cast<int>(neighbors[q].size()) >= min_pts) {
        frontier.insert(frontier.end(), neighbors[q].begin(), neighbors[q].end());
      }
    }
  }
  return labels;
}

Plane FitPlaneTls(std::span<const Eigen::Vector3d> points) {
  if (points.size() < 3) throw DegenerateError("plane fit needs at least 3 points");
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  for (const auto& p : points) mean += p;
  mean /= static_cast<double>(points.size());
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const auto& p : points) {
    const Eigen::Vector3d d = p - mean;
    cov += d * d.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(cov);
  const Eigen::Vector3d evals = solver.eigenvalues();
  if (evals(1) <= 1e-12 * std::max(evals(2), 1e-300)) {
    throw DegenerateError("plane fit input is collinear");
  }
  const Eigen::Vector3d normal = solver.eigenvectors().col(0).normalized();
  return OrientTowardCamera(normal, normal.dot(mean));
}

Plane FitPlane(const PointCloud& cloud, const PlaneFitOptions& options) {
  const auto& pts = cloud.points;
  if (pts.size() < 3) throw DegenerateError("plane fit needs at least 3 points");

  // Gross-outlier trim around the coordinate-wise median point.
  Eigen::Vector3d median;
  for (int axis = 0; axis < 3; ++axis) {
    std::vector<double> coord(pts.size());
    for (size_t i = 0; i < pts.size(); ++i) coord[i] = pts[i](axis);
    median(axis) = Median(std::move(coord));
  }
  std::vector<double> radius(pts.size());
  for (size_t i = 0; i < pts.size(); ++i) radius[i] = (pts[i] - median).norm();
  const double med_r = Median(radius);
  std::vector<double> dev(radius.size());
  for (size_t i = 0; i < radius.size(); ++i) dev[i] = std::abs(radius[i] - med_r);
  const double mad = Median(std::move(dev));
  const double cutoff =
      med_r + options.trim_sigmas * 1.4826 * mad + 1e-12 * std::max(1.0, med_r);
  std::vector<Eigen::Vector3d> trimmed;
  trimmed.reserve(pts.size());
  for (size_t i = 0; i < pts.size(); ++i) {
    if (radius[i] <= cutoff) trimmed.push_back(pts[i]);
  }

  const Plane first = FitPlaneTls(trimmed);
  std::vector<Eigen::Vector3d> inliers;
  inliers.reserve(pts.size());
  for (const auto& p : pts) {
    if (std::abs(first.SignedDistance(p)) <= options.inlier_distance) {
      inliers.push_back(p);
    }
  }
  if (inliers.size() < 3) return first;
  try {
    return FitPlaneTls(inliers);
  } catch (const DegenerateError&) {
    return first;
  }
}

std::vector<Eigen::Vector2d> ConvexHull(std::vector<Eigen::Vector2d> points) {
  std::sort(points.begin(), points.end(), [](const auto& a, const auto& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  points.erase(std::unique(points.begin(), points.end()), points.end());
  if (points.size() < 3) return points;
  std::vector<Eigen::Vector2d> hull(2 * points.size());
  size_t k = 0;
  for (const auto& p : points) {
    while (k >= 2 && Cross(hull[k - 1] - hull[k - 2], p - hull[k - 2]) <= 0) --k;
    hull[k++] = p;
  }
  const size_t lower = k + 1;
  for (size_t i = points.size() - 1; i-- > 0;) {
    const auto& p = points[i];
    while (k >= lower && Cross(hull[k - 1] - hull[k - 2], p - hull[k - 2]) <= 0) --k;
    hull[k++] = p;
  }
  hull.resize(k - 1);
  return hull;
}

Quad FitQuadrilateral(const Mask& m) {
  const auto components = ConnectedComponents(m);
  if (components.empty()) throw DegenerateError("cannot fit a quadrilateral to an empty mask");
  const Mask& largest = components.front().first;

  // Only the extreme pixel of each row can be a hull vertex.
  const uint32_t w = largest.width();
  std::vector<Eigen::Vector2d> extremes;
  uint32_t row = std::numeric_limits<uint32_t>::max();
  uint32_t row_min = 0, row_max = 0;
  const auto flush = [&] {
    if (row == std::numeric_limits<uint32_t>::max()) return;
    extremes.emplace_back(row_min, row);
    extremes.emplace_back(row_max, row);
  };
  for (const Run& r : largest.runs()) {
    for (uint32_t idx = r.start; idx < r.start + r.length;) {
      const uint32_t y = idx / w, x = idx % w;
      const uint32_t row_end = std::min(r.start + r.length, (y + 1) * w);
      const uint32_t x_last = x + (row_end - idx) - 1;
      if (y != row) {
        flush();
        row = y;
        row_min = x;
        row_max = x_last;
      } else {
        row_min = std::min(row_min, x);
        row_max = std::max(row_max, x_last);
      }
      idx = row_end;
    }
  }
  flush();

  std::vector<Eigen::Vector2d> hull = ConvexHull(std::move(extremes));
  if (hull.size() < 3) throw DegenerateError("mask is too thin for a quadrilateral");
  if (hull.size() == 3) {
    // Split the longest edge so a triangle still yields four corners.
    size_t best = 0;
    double best_len = -1.0;
    for (size_t i = 0; i < 3; ++i) {
      const double len = (hull[(i + 1) % 3] - hull[i]).squaredNorm();
      if (len > best_len) {
        best_len = len;
        best = i;
      }
    }
    hull.insert(hull.begin() + best + 1, 0.5 * (hull[best] + hull[(best + 1) % 3]));
  }

  while (hull.size() > 4) {
    const size_t n = hull.size();
    double best_area = std::numeric_limits<double>::infinity();
    size_t best_edge = n;
    Eigen::Vector2d best_point;
    for (size_t i = 0; i < n; ++i) {
      const Eigen::Vector2d& prev = hull[(i + n - 1) % n];
      const Eigen::Vector2d& a = hull[i];
      const Eigen::Vector2d& b = hull[(i + 1) % n];
      const Eigen::Vector2d& next = hull[(i + 2) % n];
      const Eigen::Vector2d da = a - prev;
      const Eigen::Vector2d db = b - next;
      const double denom = Cross(da, db);
      if (std::abs(denom) < 1e-12) continue;
      // a + t * da == b + s * db
      const Eigen::Vector2d diff = b - a;
      const double t = Cross(diff, db) / denom;
      const double s = Cross(diff, da) / denom;
      if (t < 0.0 || s < 0.0) continue;
      const Eigen::Vector2d x = a + t * da;
      const double area = 0.5 * std::abs(Cross(b - a, x - a));
      if (area < best_area) {
        best_area = area;
        best_edge = i;
        best_point = x;
      }
    }
    if (best_edge == n) {
      // No edge can be absorbed outward; drop the flattest vertex instead.
      size_t flat = 0;
      double flat_area = std::numeric_limits<double>::infinity();
      for (size_t i = 0; i < n; ++i) {
        const double area = 0.5 * std::abs(Cross(hull[i] - hull[(i + n - 1) % n],
                                                 hull[(i + 1) % n] - hull[(i + n - 1) % n]));
        if (area < flat_area) {
          flat_area = area;
          flat = i;
        }
      }
      hull.erase(hull.begin() + flat);
      continue;
    }
    const size_t j = (best_edge + 1) % n;
    hull[best_edge] = best_point;
    hull.erase(hull.begin() + j);
  }

  Eigen::Vector2d c = Eigen::Vector2d::Zero();
  for (const auto& p : hull) c += p;
  c /= 4.0;
  // With y pointing down, increasing atan2 angle is clockwise on screen.
  std::sort(hull.begin(), hull.end(), [&](const auto& a, const auto& b) {
    return std::atan2(a.y() - c.y(), a.x() - c.x()) <
           std::atan2(b.y() - c.y(), b.x() - c.x());
  });
  size_t start = 0;
  for (size_t i = 1; i < 4; ++i) {
    const double si = hull[i].x() + hull[i].y();
    const double ss = hull[start].x() + hull[start].y();
    if (si < ss || (si == ss && hull[i].y() < hull[start].y())) start = i;
  }
  Quad quad;
  for (size_t i = 0; i < 4; ++i) quad[i] = hull[(start + i) % 4];
  return quad;
}

Homography HomographyFromCorners(const Quad& quad, const Quad& target) {
  for (size_t i = 0; i < 4; ++i) {
    for (size_t j = i + 1; j < 4; ++j) {
      for (size_t k = j + 1; k < 4; ++k) {
        const Eigen::Vector2d u = quad[j] - quad[i];
        const Eigen::Vector2d v = quad[k] - quad[i];
        if (std::abs(Cross(u, v)) <= 1e-12 * std::max(1.0, u.norm() * v.norm())) {
          throw DegenerateError("three source corners are collinear");
        }
      }
    }
  }
  Eigen::Matrix<double, 8, 8> a;
  Eigen::Matrix<double, 8, 1> b;
  for (int i = 0; i < 4; ++i) {
    const double x = quad[i].x(), y = quad[i].y();
    const double u = target[i].x(), v = target[i].y();
    a.row(2 * i) << x, y, 1, 0, 0, 0, -u * x, -u * y;
    a.row(2 * i + 1) << 0, 0, 0, x, y, 1, -v * x, -v * y;
    b(2 * i) = u;
    b(2 * i + 1) = v;
  }
  Eigen::FullPivLU<Eigen::Matrix<double, 8, 8>> lu(a);
  if (!lu.isInvertible()) throw DegenerateError("singular corner configuration");
  const Eigen::Matrix<double, 8, 1> h = lu.solve(b);
  Eigen::Matrix3d m;
  m << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), 1.0;
  return Homography(m);
}

Eigen::Vector2d ProjectPoint(const Homography& h, const Eigen::Vector2d& p) {
  const Eigen::Vector3d q = h.matrix() * Eigen::Vector3d(p.x(), p.y(), 1.0);
  if (std::abs(q.z()) < 1e-12) throw DegenerateError("point maps to infinity");
  return {q.x() / q.z(), q.y() / q.z()};
}

const std::array<std::string, 9>& GridCellLabels() {
  static const std::array<std::string, 9> kLabels = {
      "top left",    "top center",    "top right",
      "center left", "center",        "center right",
      "bottom left", "bottom center", "bottom right"};
  return kLabels;
}

std::string GridCell(const Eigen::Vector2d& p) {
  const auto third = [](double v) {
    v = std::clamp(v, 0.0, 1.0);
    if (v >= 2.0 / 3.0) return 2;
    if (v >= 1.0 / 3.0) return 1;
    return 0;
  };
  return GridCellLabels()[3 * third(p.y()) + third(p.x())];
}

PointCloud Backproject(const DepthMap& depth, const Intrinsics& intrinsics,
                       const Mask* mask, const BackprojectOptions& options) {
  PointCloud cloud;
  const uint32_t stride = std::max<uint32_t>(1, options.stride);
  const auto emit = [&](uint32_t u, uint32_t v) {
    const double z = depth.At(u, v);
    cloud.points.emplace_back((u - intrinsics.cx) / intrinsics.fx * z,
                              (v - intrinsics.cy) / intrinsics.fy * z, z);
  };
  if (mask == nullptr) {
    for (uint32_t v = 0; v < depth.height; v += stride) {
      for (uint32_t u = 0; u < depth.width; u += stride) emit(u, v);
    }
  } else {
    if (mask->width() != depth.width || mask->height() != depth.height) {
      throw ValidationError("mask", "dimension mismatch with depth map");
    }
    const uint32_t w = depth.width;
    for (const Run& r : mask->runs()) {
      for (uint32_t idx = r.start; idx < r.start + r.length; ++idx) {
        const uint32_t u = idx % w, v = idx / w;
        if (u % stride == 0 && v % stride == 0) emit(u, v);
      }
    }
  }
  if (options.outlier_k > 0) {
    RemoveStatisticalOutliers(cloud, options.outlier_k, options.outlier_std_ratio);
  }
  return cloud;
}

size_t RemoveStatisticalOutliers(PointCloud& cloud, int k, double std_ratio) {
  const size_t n = cloud.points.size();
  if (k <= 0 || n <= static_cast<size_t>(k)) return 0;
  std::vector<double> mean_dist(n);
  std::vector<double> d(n - 1);
  for (size_t i = 0; i < n; ++i) {
    size_t m = 0;
    for (size_t j = 0; j < n; ++j) {
      if (j != i) d[m++] = (cloud.points[i] - cloud.points[j]).norm();
    }
    std::nth_element(d.begin(), d.begin() + (k - 1), d.end());
    mean_dist[i] = std::accumulate(d.begin(), d.begin() + k, 0.0) / k;
  }
  const double mu = std::accumulate(mean_dist.begin(), mean_dist.end(), 0.0) / n;
  double var = 0.0;
  for (double v : mean_dist) var += (v - mu) * (v - mu);
  const double sigma = std::sqrt(var / n);
  const double limit = mu + std_ratio * sigma;
  const bool has_ids = cloud.object_ids.size() == n;
  size_t out = 0;
  for (size_t i = 0; i < n; ++i) {
    if (mean_dist[i] > limit) continue;
    cloud.points[out] = cloud.points[i];
    if (has_ids) cloud.object_ids[out] = cloud.object_ids[i];
    ++out;
  }
  cloud.points.resize(out);
  if (has_ids) cloud.object_ids.resize(out);
  return n - out;
}

}  // namespace playseg
