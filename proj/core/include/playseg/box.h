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

#ifndef PLAYSEG_BOX_H_
#define PLAYSEG_BOX_H_

#include <Eigen/Core>

namespace playseg {

// Axis-aligned box in pixel coordinates, (x1, y1) top-left, (x2, y2)
// bottom-right.
struct Box {
  double x1 = 0.0;
  double y1 = 0.0;
  double x2 = 0.0;
  double y2 = 0.0;

  double Width() const { return x2 - x1; }
  double Height() const { return y2 - y1; }
  double Area() const { return Width() * Height(); }
  Eigen::Vector2d Center() const { return {0.5 * (x1 + x2), 0.5 * (y1 + y2)}; }
  Eigen::Vector2d BottomCenter() const { return {0.5 * (x1 + x2), y2}; }
  bool IsValid() const { return x1 < x2 && y1 < y2; }
  bool Within(double width, double height) const {
    return x1 >= 0.0 && y1 >= 0.0 && x2 <= width && y2 <= height;
  }
  // Box scaled about its center.
  Box Scaled(double factor) const;
  Box Translated(double dx, double dy) const {
    return {x1 + dx, y1 + dy, x2 + dx, y2 + dy};
  }

  friend bool operator==(const Box&, const Box&) = default;
};

double IntersectionArea(const Box& a, const Box& b);
double Iou(const Box& a, const Box& b);

}  // namespace playseg

#endif  // PLAYSEG_BOX_H_
