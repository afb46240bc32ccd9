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

#include "playseg/fusion.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "playseg/error.h"
#include "playseg/geometry.h"

namespace playseg {

namespace {

double Median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Below this spread (pixels) boxes count as identical for the outlier test.
constexpr double kMadFloor = 0.5;

Box MeanBox(const std::vector<std::pair<Box, double>>& boxes,
            const std::vector<size_t>& members) {
  // Sum in a canonical order so the result is permutation invariant.
  std::vector<Box> sorted;
  for (size_t i : members) sorted.push_back(boxes[i].first);
  std::sort(sorted.begin(), sorted.end(), [](const Box& a, const Box& b) {
    return std::tie(a.x1, a.y1, a.x2, a.y2) < std::tie(b.x1, b.y1, b.x2, b.y2);
  });
  Box mean{0, 0, 0, 0};
  for (const Box& b : sorted) {
    mean.x1 += b.x1;
    mean.y1 += b.y1;
    mean.x2 += b.x2;
    mean.y2 += b.y2;
  }
  const double n = static_cast<double>(sorted.size());
  return {mean.x1 / n, mean.y1 / n, mean.x2 / n, mean.y2 / n};
}

}  // namespace

size_t ObjectTrack::PresentCount() const {
  return std::count_if(frames.begin(), frames.end(),
                       [](const TrackFrame& f) { return f.present; });
}

StaticBox RefineStaticBox(const std::vector<std::pair<Box, double>>& boxes,
                          double image_diagonal, const FusionOptions& options) {
  if (boxes.empty()) throw Error("RefineStaticBox: no boxes");
  if (boxes.size() == 1) return {0, boxes[0].first, 1, boxes[0].second};

  std::vector<double> cx, cy;
  for (const auto& [box, conf] : boxes) {
    cx.push_back(box.Center().x());
    cy.push_back(box.Center().y());
  }
  const double mx = Median(cx), my = Median(cy);
  std::vector<double> dev(boxes.size());
  for (size_t i = 0; i < boxes.size(); ++i) dev[i] = std::hypot(cx[i] - mx, cy[i] - my);
  const double mad = std::max(Median(dev), kMadFloor);

  std::vector<size_t> kept;
  for (size_t i = 0; i < boxes.size(); ++i) {
    if (dev[i] <= options.mad_cutoff * mad) kept.push_back(i);
  }

  std::vector<Eigen::VectorXd> pts;
  for (size_t i : kept) {
    const Box& b = boxes[i].first;
    Eigen::VectorXd v(4);
    v << b.x1, b.y1, b.x2, b.y2;
    pts.push_back(std::move(v));
  }
  const std::vector<int> labels =
      Dbscan(pts, options.eps_frac * image_diagonal, options.min_pts);
  const int n_clusters =
      labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;

  std::vector<size_t> best;
  double best_sum = -1.0;
  Box best_mean;
  for (int c = 0; c < n_clusters; ++c) {
    std::vector<size_t> members;
    double sum = 0.0;
    for (size_t k = 0; k < kept.size(); ++k) {
      if (labels[k] == c) {
        members.push_back(kept[k]);
        sum += boxes[kept[k]].second;
      }
    }
    const Box mean = MeanBox(boxes, members);
    const bool better =
        sum > best_sum ||
        (sum == best_sum &&
         std::tie(mean.x1, mean.y1, mean.x2, mean.y2) <
             std::tie(best_mean.x1, best_mean.y1, best_mean.x2, best_mean.y2));
    if (better) {
      best = std::move(members);
      best_sum = sum;
      best_mean = mean;
    }
  }
  if (best.empty()) {
    // Everything is noise: fall back to the most confident surviving box.
    size_t top = kept.front();
    for (size_t i : kept) {
      if (boxes[i].second > boxes[top].second) top = i;
    }
    return {0, boxes[top].first, 1, boxes[top].second};
  }
  return {0, best_mean, static_cast<int>(best.size()), best_sum / best.size()};
}

Mask CleanMask(const Mask& m, double min_area_frac) {
  if (m.empty()) return m;
  auto components = ConnectedComponents(m);
  if (components.size() == 1) return m;
  const double floor = min_area_frac * static_cast<double>(components.front().second);
  Mask out(m.width(), m.height());
  for (const auto& [component, area] : components) {
    if (static_cast<double>(area) >= floor) out = Union(out, component);
  }
  return out;
}

std::map<std::string, Mask> MergeSameClass(
    const std::vector<std::pair<Mask, std::string>>& masks) {
  std::map<std::string, Mask> out;
  for (const auto& [mask, cls] : masks) {
    auto it = out.find(cls);
    if (it == out.end()) {
      out.emplace(cls, mask);
    } else {
      it->second = Union(it->second, mask);
    }
  }
  return out;
}

std::pair<std::string, double> ResolveTrackClass(
    const std::map<std::string, std::vector<double>>& history) {
  std::pair<std::string, double> best{"", -1.0};
  for (const auto& [name, scores] : history) {
    if (scores.empty()) continue;
    const double mean =
        std::accumulate(scores.begin(), scores.end(), 0.0) / scores.size();
    // Map iteration is lexicographic, so strict > keeps the smaller name.
    if (mean > best.second) best = {name, mean};
  }
  if (best.second < 0.0) throw Error("ResolveTrackClass: empty history");
  return best;
}

std::vector<ObjectTrack> BuildTracks(const Episode& ep,
                                     const ObjectRegistry& registry,
                                     const FusionOptions& options) {
  std::vector<ObjectTrack> tracks;
  for (const ObjectEntry& entry : registry.entries) {
    ObjectTrack track;
    track.object_id = entry.object_id;
    track.frames.resize(ep.frames.size());
    for (size_t t = 0; t < ep.frames.size(); ++t) {
      const FrameRecord& f = ep.frames[t];
      TrackFrame& tf = track.frames[t];
      std::map<std::string, double> best_per_name;
      const RawDetection* bound = nullptr;
      double bound_score = -1.0;
      for (const RawDetection& d : f.detections) {
        if (!entry.HasName(d.name)) continue;
        const double s = CombineAlignment(d);
        double& slot = best_per_name.try_emplace(d.name, s).first->second;
        slot = std::max(slot, s);
        if (s > bound_score) {
          bound = &d;
          bound_score = s;
        }
      }
      for (const auto& [name, s] : best_per_name) {
        track.class_history[name].push_back(s);
      }
      if (bound != nullptr) {
        tf.present = true;
        tf.box = bound->box;
        tf.score = bound_score;
        tf.matched_name = bound->name;
      }

      std::shared_ptr<const Mask> merged;
      for (const MaskRecord& mr : f.masks) {
        if (!mr.mask || mr.object.empty() || !entry.HasName(mr.object)) continue;
        merged = merged ? std::make_shared<const Mask>(Union(*merged, *mr.mask))
                        : mr.mask;
      }
      if (merged) {
        Mask cleaned = CleanMask(*merged, options.min_component_frac);
        tf.mask = cleaned == *merged ? merged
                                     : std::make_shared<const Mask>(std::move(cleaned));
      }

      if (f.flow_magnitude) {
        double sum = 0.0;
        int n = 0;
        for (const std::string& name : entry.AllNames()) {
          auto it = f.flow_magnitude->find(name);
          if (it != f.flow_magnitude->end()) {
            sum += it->second;
            ++n;
          }
        }
        if (n > 0) tf.flow = sum / n;
      }
    }

    if (!track.class_history.empty()) {
      std::tie(track.resolved_class, track.resolved_score) =
          ResolveTrackClass(track.class_history);
    }
    if (!entry.properties.movable) {
      std::vector<std::pair<Box, double>> boxes;
      for (const TrackFrame& tf : track.frames) {
        if (tf.present) boxes.emplace_back(*tf.box, tf.score);
      }
      if (!boxes.empty()) {
        StaticBox sb = RefineStaticBox(boxes, ep.Diagonal(), options);
        sb.object_id = entry.object_id;
        for (TrackFrame& tf : track.frames) tf.box = sb.box;
        track.static_box = sb;
      }
    }
    tracks.push_back(std::move(track));
  }
  return tracks;
}

}  // namespace playseg
