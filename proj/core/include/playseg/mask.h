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

#ifndef PLAYSEG_MASK_H_
#define PLAYSEG_MASK_H_

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "playseg/box.h"

namespace playseg {

// A maximal horizontal run of set pixels in row-major order.
struct Run {
  uint32_t start = 0;
  uint32_t length = 0;
  friend bool operator==(const Run&, const Run&) = default;
};

// Binary mask stored as sorted, non-overlapping, non-adjacent runs over the
// row-major pixel index. Adjacent runs are always coalesced so that two masks
// covering the same pixel set compare equal.
class Mask {
 public:
  Mask() = default;
  Mask(uint32_t width, uint32_t height) : width_(width), height_(height) {}

  // Validates and normalizes `runs` (sorts, coalesces). Throws
  // ValidationError when a run leaves the image or runs overlap.
  static Mask FromRuns(uint32_t width, uint32_t height, std::vector<Run> runs);
  static Mask FromDense(uint32_t width, uint32_t height,
                        std::span<const uint8_t> pixels);
  // Pixels whose integer coordinates fall inside `box` (x1 <= x < x2).
  static Mask FromBox(uint32_t width, uint32_t height, const Box& box);

  uint32_t width() const { return width_; }
  uint32_t height() const { return height_; }
  const std::vector<Run>& runs() const { return runs_; }
  bool empty() const { return runs_.empty(); }

  uint64_t Area() const;
  bool Test(uint32_t x, uint32_t y) const;
  std::vector<uint8_t> ToDense() const;
  // Tight integer bounds as a Box with exclusive max; Box{} when empty.
  Box Bounds() const;

  friend bool operator==(const Mask&, const Mask&) = default;

 private:
  uint32_t width_ = 0;
  uint32_t height_ = 0;
  std::vector<Run> runs_;
};

// Calls fn(y, x_begin, x_end) for every row segment of every run; x_end is
// exclusive. Runs that wrap a row boundary are split.
template <typename Fn>
void ForEachRowSpan(const Mask& m, Fn&& fn) {
  const uint32_t w = m.width();
  for (const Run& r : m.runs()) {
    uint32_t idx = r.start;
    const uint32_t end = r.start + r.length;
    while (idx < end) {
      const uint32_t y = idx / w;
      const uint32_t row_end = std::min(end, (y + 1) * w);
      fn(y, idx - y * w, row_end - y * w);
      idx = row_end;
    }
  }
}

// Pixelwise IOU. Throws ValidationError on dimension mismatch.
double MaskIou(const Mask& a, const Mask& b);
uint64_t IntersectionArea(const Mask& a, const Mask& b);
Mask Union(const Mask& a, const Mask& b);

// 4-connected components sorted by area descending (ties: first pixel index).
std::vector<std::pair<Mask, uint64_t>> ConnectedComponents(const Mask& m);

// Sidecar encoding: u32 width, u32 height, u32 run count, then (start, length)
// u32 pairs, all little-endian.
std::string EncodeMaskSidecar(const Mask& m);
Mask DecodeMaskSidecar(const std::string& bytes);

}  // namespace playseg

#endif  // PLAYSEG_MASK_H_
