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

#include "playseg/mask.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <deque>

#include "playseg/error.h"

namespace playseg {
namespace {

void AppendRun(std::vector<Run>& runs, uint32_t start, uint32_t length) {
  if (length == 0) return;
  if (!runs.empty() && runs.back().start + runs.back().length == start) {
    runs.back().length += length;
  } else {
    runs.push_back({start, length});
  }
}

std::vector<Run> RunsFromSortedIndices(std::span<const uint32_t> indices) {
  std::vector<Run> runs;
  for (uint32_t idx : indices) AppendRun(runs, idx, 1);
  return runs;
}

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

}  // namespace

Mask Mask::FromRuns(uint32_t width, uint32_t height, std::vector<Run> runs) {
  const uint64_t total = static_cast<uint64_t>(width) * height;
  std::sort(runs.begin(), runs.end(),
            [](const Run& a, const Run& b) { return a.start < b.start; });
  Mask m(width, height);
  uint64_t prev_end = 0;
  for (const Run& r : runs) {
    if (r.length == 0) continue;
    const uint64_t end = static_cast<uint64_t>(r.start) + r.length;
    if (end > total) {
      throw ValidationError("mask.runs", "run exceeds image of " +
                                             std::to_string(total) + " pixels");
    }
    if (r.start < prev_end) {
      throw ValidationError("mask.runs", "overlapping runs at pixel " +
                                             std::to_string(r.start));
    }
    AppendRun(m.runs_, r.start, r.length);
    prev_end = end;
  }
  return m;
}

Mask Mask::FromDense(uint32_t width, uint32_t height,
                     std::span<const uint8_t> pixels) {
  if (pixels.size() != static_cast<size_t>(width) * height) {
    throw ValidationError("mask", "dense buffer size does not match dimensions");
  }
  Mask m(width, height);
  uint32_t i = 0;
  const uint32_t n = static_cast<uint32_t>(pixels.size());
  while (i < n) {
    if (!pixels[i]) {
      ++i;
      continue;
    }
    uint32_t j = i;
    while (j < n && pixels[j]) ++j;
    m.runs_.push_back({i, j - i});
    i = j;
  }
  return m;
}

Mask Mask::FromBox(uint32_t width, uint32_t height, const Box& box) {
  Mask m(width, height);
  const auto clampi = [](double v, uint32_t hi) {
    return static_cast<uint32_t>(std::clamp(std::ceil(v), 0.0, static_cast<double>(hi)));
  };
  const uint32_t x0 = clampi(box.x1, width);
  const uint32_t x1 = clampi(box.x2, width);
  const uint32_t y0 = clampi(box.y1, height);
  const uint32_t y1 = clampi(box.y2, height);
  if (x0 >= x1 || y0 >= y1) return m;
  for (uint32_t y = y0; y < y1; ++y) AppendRun(m.runs_, y * width + x0, x1 - x0);
  return m;
}

uint64_t Mask::Area() const {
  uint64_t area = 0;
  for (const Run& r : runs_) area += r.length;
  return area;
}

bool Mask::Test(uint32_t x, uint32_t y) const {
  const uint32_t idx = y * width_ + x;
  auto it = std::upper_bound(runs_.begin(), runs_.end(), idx,
                             [](uint32_t v, const Run& r) { return v < r.start; });
  if (it == runs_.begin()) return false;
  --it;
  return idx < it->start + it->length;
}

std::vector<uint8_t> Mask::ToDense() const {
  std::vector<uint8_t> out(static_cast<size_t>(width_) * height_, 0);
  for (const Run& r : runs_) std::fill_n(out.begin() + r.start, r.length, 1);
  return out;
}

Box Mask::Bounds() const {
  if (runs_.empty()) return {};
  uint32_t min_x = width_, max_x = 0, min_y = height_, max_y = 0;
  for (const Run& r : runs_) {
    const uint32_t first = r.start;
    const uint32_t last = r.start + r.length - 1;
    const uint32_t y0 = first / width_, y1 = last / width_;
    min_y = std::min(min_y, y0);
    max_y = std::max(max_y, y1);
    if (y0 == y1) {
      min_x = std::min(min_x, first % width_);
      max_x = std::max(max_x, last % width_);
    } else {
      // A run that wraps a row boundary touches both image edges.
      min_x = 0;
      max_x = width_ - 1;
    }
  }
  return {static_cast<double>(min_x), static_cast<double>(min_y),
          static_cast<double>(max_x + 1), static_cast<double>(max_y + 1)};
}

uint64_t IntersectionArea(const Mask& a, const Mask& b) {
  if (a.width() != b.width() || a.height() != b.height()) {
    throw ValidationError("mask", "dimension mismatch");
  }
  uint64_t inter = 0;
  size_t i = 0, j = 0;
  const auto& ra = a.runs();
  const auto& rb = b.runs();
  while (i < ra.size() && j < rb.size()) {
    const uint64_t a0 = ra[i].start, a1 = a0 + ra[i].length;
    const uint64_t b0 = rb[j].start, b1 = b0 + rb[j].length;
    const uint64_t lo = std::max(a0, b0), hi = std::min(a1, b1);
    if (hi > lo) inter += hi - lo;
    if (a1 < b1) {
      ++i;
    } else {
      ++j;
    }
  }
  return inter;
}

double MaskIou(const Mask& a, const Mask& b) {
  const uint64_t inter = IntersectionArea(a, b);
  const uint64_t uni = a.Area() + b.Area() - inter;
  if (uni == 0) return 1.0;  // Two empty masks are the same set.
  return static_cast<double>(inter) / static_cast<double>(uni);
}

Mask Union(const Mask& a, const Mask& b) {
  if (a.width() != b.width() || a.height() != b.height()) {
    throw ValidationError("mask", "dimension mismatch");
  }
  std::vector<Run> merged;
  merged.reserve(a.runs().size() + b.runs().size());
  std::merge(a.runs().begin(), a.runs().end(), b.runs().begin(), b.runs().end(),
             std::back_inserter(merged),
             [](const Run& x, const Run& y) { return x.start < y.start; });
  std::vector<Run> out;
  for (const Run& r : merged) {
    if (!out.empty() && r.start <= out.back().start + out.back().length) {
      const uint32_t end = std::max(out.back().start + out.back().length,
                                    r.start + r.length);
      out.back().length = end - out.back().start;
    } else {
      out.push_back(r);
    }
  }
  return Mask::FromRuns(a.width(), a.height(), std::move(out));
}

std::vector<std::pair<Mask, uint64_t>> ConnectedComponents(const Mask& m) {
  const uint32_t w = m.width(), h = m.height();
  const std::vector<uint8_t> dense = m.ToDense();
  std::vector<int32_t> label(dense.size(), -1);
  std::vector<std::vector<uint32_t>> comps;
  std::deque<uint32_t> queue;
  for (const Run& r : m.runs()) {
    for (uint32_t idx = r.start; idx < r.start + r.length; ++idx) {
      if (label[idx] >= 0) continue;
      const int32_t id = static_cast<int32_t>(comps.size());
      comps.emplace_back();
      label[idx] = id;
      queue.push_back(idx);
      while (!queue.empty()) {
        const uint32_t p = queue.front();
        queue.pop_front();
        comps.back().push_back(p);
        const uint32_t x = p % w, y = p / w;
        const auto visit = [&](uint32_t q) {
          if (dense[q] && label[q] < 0) {
            label[q] = id;
            queue.push_back(q);
          }
        };
        if (x > 0) visit(p - 1);
        if (x + 1 < w) visit(p + 1);
        if (y > 0) visit(p - w);
        if (y + 1 < h) visit(p + w);
      }
    }
  }
  std::vector<std::pair<Mask, uint64_t>> out;
  out.reserve(comps.size());
  for (auto& pixels : comps) {
    std::sort(pixels.begin(), pixels.end());
    Mask c = Mask::FromRuns(w, h, RunsFromSortedIndices(pixels));
    out.emplace_back(std::move(c), pixels.size());
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first.runs().front().start < b.first.runs().front().start;
  });
  return out;
}

std::string EncodeMaskSidecar(const Mask& m) {
  std::string out;
  out.reserve(12 + 8 * m.runs().size());
  PutU32(out, m.width());
  PutU32(out, m.height());
  PutU32(out, static_cast<uint32_t>(m.runs().size()));
  for (const Run& r : m.runs()) {
    PutU32(out, r.start);
    PutU32(out, r.length);
  }
  return out;
}

Mask DecodeMaskSidecar(const std::string& bytes) {
  if (bytes.size() < 12) throw ParseError("mask sidecar shorter than header", 0);
  const uint32_t w = GetU32(bytes, 0), h = GetU32(bytes, 4), n = GetU32(bytes, 8);
  if (bytes.size() != 12 + 8ull * n) {
    throw ParseError("mask sidecar size does not match run count", 0);
  }
  std::vector<Run> runs(n);
  for (uint32_t i = 0; i < n; ++i) {
    runs[i] = {GetU32(bytes, 12 + 8 * i), GetU32(bytes, 16 + 8 * i)};
  }
  return Mask::FromRuns(w, h, std::move(runs));
}

}  // namespace playseg
