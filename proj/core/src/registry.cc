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

#include "playseg/registry.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include <nlohmann/json.hpp>

#include "playseg/error.h"
#include "playseg/text.h"

namespace playseg {

namespace {

class DisjointSets {
 public:
  explicit DisjointSets(size_t n) : parent_(n) {
    std::iota(parent_.begin(), parent_.end(), size_t{0});
  }
  size_t Find(size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  // The smaller root wins so results do not depend on call order.
  size_t Unite(size_t a, size_t b) {
    a = Find(a);
    b = Find(b);
    if (a == b) return a;
    if (b < a) std::swap(a, b);
    parent_[b] = a;
    return a;
  }

 private:
  std::vector<size_t> parent_;
};

double Median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

Box MedianBox(const std::vector<RawDetection>& members) {
  std::vector<double> x1, y1, x2, y2;
  for (const RawDetection& d : members) {
    x1.push_back(d.box.x1);
    y1.push_back(d.box.y1);
    x2.push_back(d.box.x2);
    y2.push_back(d.box.y2);
  }
  return {Median(x1), Median(y1), Median(x2), Median(y2)};
}

// Most frequent value, ties to the lexicographically smaller one.
std::string Mode(const std::map<std::string, int>& counts) {
  std::string best;
  int best_count = 0;
  for (const auto& [value, count] : counts) {
    if (count > best_count) {
      best = value;
      best_count = count;
    }
  }
  return best;
}

}  // namespace

bool ObjectEntry::HasName(const std::string& name) const {
  return canonical_name == name ||
         std::find(synonyms.begin(), synonyms.end(), name) != synonyms.end();
}

std::vector<std::string> ObjectEntry::AllNames() const {
  std::vector<std::string> names{canonical_name};
  names.insert(names.end(), synonyms.begin(), synonyms.end());
  return names;
}

const ObjectEntry* ObjectRegistry::Find(int object_id) const {
  if (object_id < 0 || object_id >= static_cast<int>(entries.size())) {
    return nullptr;
  }
  return &entries[object_id];
}

const ObjectEntry* ObjectRegistry::FindByName(const std::string& name) const {
  for (const ObjectEntry& e : entries) {
    if (e.HasName(name)) return &e;
  }
  return nullptr;
}

void ValidateRegistry(const ObjectRegistry& registry) {
  std::set<std::string> seen;
  int surfaces = 0;
  for (size_t i = 0; i < registry.entries.size(); ++i) {
    const ObjectEntry& e = registry.entries[i];
    if (e.object_id != static_cast<int>(i)) {
      throw ValidationError("object_id", "ids must be dense from 0");
    }
    for (const std::string& name : e.AllNames()) {
      if (name.empty()) throw ValidationError("canonical_name", "empty name");
      if (!seen.insert(name).second) {
        throw ValidationError("synonyms", "name '" + name + "' is not unique");
      }
    }
    if (e.is_surface) {
      ++surfaces;
      if (e.properties.movable) {
        throw ValidationError("movable", "surface entries cannot be movable");
      }
      if (registry.surface_id != e.object_id) {
        throw ValidationError("surface_id", "does not name the surface entry");
      }
    }
  }
  if (surfaces > 1) throw ValidationError("is_surface", "more than one surface");
  if (registry.surface_id && surfaces == 0) {
    throw ValidationError("surface_id", "no entry is marked as surface");
  }
}

std::vector<size_t> SampleQueryFrames(size_t frame_count, int n) {
  std::vector<size_t> out;
  if (frame_count == 0 || n < 1) return out;
  if (n == 1) return {0};
  const double step = static_cast<double>(frame_count - 1) / (n - 1);
  for (int i = 0; i < n; ++i) {
    const size_t idx = static_cast<size_t>(std::llround(i * step));
    if (out.empty() || out.back() != idx) out.push_back(idx);
  }
  return out;
}

std::vector<int64_t> SampleQueryFrames(const Episode& ep, int n) {
  std::vector<int64_t> out;
  for (size_t pos : SampleQueryFrames(ep.frames.size(), n)) {
    out.push_back(ep.frames[pos].frame_index);
  }
  return out;
}

std::vector<std::vector<size_t>> GroupCooccurring(
    const std::vector<RawDetection>& dets, double iou_thresh) {
  DisjointSets sets(dets.size());
  for (size_t i = 0; i < dets.size(); ++i) {
    for (size_t j = i + 1; j < dets.size(); ++j) {
      if (Iou(dets[i].box, dets[j].box) >= iou_thresh) sets.Unite(i, j);
    }
  }
  std::map<size_t, std::vector<size_t>> by_root;
  for (size_t i = 0; i < dets.size(); ++i) by_root[sets.Find(i)].push_back(i);
  std::vector<std::vector<size_t>> groups;
  for (auto& [root, members] : by_root) groups.push_back(std::move(members));
  return groups;
}

ObjectRegistry ConsensusNames(const std::vector<DetectionGroup>& groups,
                              double iou_thresh) {
  const size_t n = groups.size();
  DisjointSets sets(n);
  std::vector<std::set<int64_t>> frames(n);
  std::vector<Box> median(n);
  for (size_t i = 0; i < n; ++i) {
    frames[i].insert(groups[i].frame_index);
    if (!groups[i].members.empty()) median[i] = MedianBox(groups[i].members);
  }
  auto unite = [&](size_t a, size_t b) {
    const size_t ra = sets.Find(a), rb = sets.Find(b);
    if (ra == rb) return;
    const size_t root = sets.Unite(ra, rb);
    const size_t other = root == ra ? rb : ra;
    frames[root].insert(frames[other].begin(), frames[other].end());
  };

  // Shared names always merge; the registry must list each name once.
  std::map<std::string, size_t> first_with_name;
  for (size_t i = 0; i < n; ++i) {
    for (const RawDetection& d : groups[i].members) {
      auto [it, inserted] = first_with_name.emplace(d.name, i);
      if (!inserted) unite(it->second, i);
    }
  }
  for (size_t i = 0; i < n; ++i) {
    if (groups[i].members.empty()) continue;
    for (size_t j = i + 1; j < n; ++j) {
      if (groups[j].members.empty()) continue;
      const size_t ri = sets.Find(i), rj = sets.Find(j);
      if (ri == rj || Iou(median[i], median[j]) < iou_thresh) continue;
      const bool overlap = std::any_of(
          frames[ri].begin(), frames[ri].end(),
          [&](int64_t f) { return frames[rj].count(f) > 0; });
      if (!overlap) unite(ri, rj);
    }
  }

  std::map<size_t, std::map<std::string, std::vector<double>>> clusters;
  for (size_t i = 0; i < n; ++i) {
    for (const RawDetection& d : groups[i].members) {
      clusters[sets.Find(i)][d.name].push_back(d.confidence);
    }
  }

  ObjectRegistry registry;
  for (const auto& [root, names] : clusters) {
    std::vector<std::pair<double, std::string>> ranked;
    for (const auto& [name, confs] : names) {
      const double mean =
          std::accumulate(confs.begin(), confs.end(), 0.0) / confs.size();
      ranked.emplace_back(mean, name);
    }
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
      return a.first != b.first ? a.first > b.first : a.second < b.second;
    });
    ObjectEntry e;
    e.canonical_name = ranked.front().second;
    e.representative_confidence = ranked.front().first;
    for (size_t k = 1; k < ranked.size(); ++k) {
      e.synonyms.push_back(ranked[k].second);
    }
    registry.entries.push_back(std::move(e));
  }
  std::sort(registry.entries.begin(), registry.entries.end(),
            [](const ObjectEntry& a, const ObjectEntry& b) {
              return a.canonical_name < b.canonical_name;
            });
  for (size_t i = 0; i < registry.entries.size(); ++i) {
    registry.entries[i].object_id = static_cast<int>(i);
  }
  return registry;
}

std::vector<RawDetection> FilterObjectness(
    const std::vector<RawDetection>& dets,
    const std::optional<std::vector<ObjectnessBox>>& boxes,
    double min_objectness, double min_iou) {
  if (!boxes) return dets;
  std::vector<RawDetection> kept;
  for (const RawDetection& d : dets) {
    const bool supported =
        std::any_of(boxes->begin(), boxes->end(), [&](const ObjectnessBox& b) {
          return b.objectness >= min_objectness && Iou(d.box, b.box) >= min_iou;
        });
    if (supported) kept.push_back(d);
  }
  return kept;
}

double CombineAlignment(double detector_conf, std::optional<double> alignment) {
  return alignment ? 0.5 * (detector_conf + *alignment) : detector_conf;
}

double CombineAlignment(const RawDetection& det) {
  return CombineAlignment(det.confidence, det.alignment);
}

ObjectRegistry BuildRegistry(const Episode& ep, const RegistryOptions& options) {
  std::vector<DetectionGroup> groups;
  std::map<std::string, int> surface_votes;
  std::map<std::string, std::map<std::string, int>> colors;
  for (size_t pos : SampleQueryFrames(ep.frames.size(), options.query_frames)) {
    const FrameRecord& f = ep.frames[pos];
    std::vector<RawDetection> dets =
        FilterObjectness(f.detections, f.objectness_boxes,
                         options.min_objectness, options.iou_thresh);
    for (RawDetection& d : dets) {
      d.confidence = CombineAlignment(d);
      d.alignment.reset();
    }
    for (const auto& members : GroupCooccurring(dets, options.iou_thresh)) {
      DetectionGroup g{f.frame_index, {}};
      for (size_t m : members) g.members.push_back(dets[m]);
      groups.push_back(std::move(g));
    }
    if (f.vlm_proposals && !f.vlm_proposals->empty()) {
      const std::string& first = f.vlm_proposals->front().name;
      if (ToLower(first) != "none") ++surface_votes[first];
      for (const VlmProposal& p : *f.vlm_proposals) {
        if (!p.color.empty()) ++colors[p.name][p.color];
      }
    }
  }

  ObjectRegistry registry = ConsensusNames(groups, options.iou_thresh);
  for (ObjectEntry& e : registry.entries) {
    std::map<std::string, int> counts;
    for (const std::string& name : e.AllNames()) {
      auto it = colors.find(name);
      if (it == colors.end()) continue;
      for (const auto& [color, c] : it->second) counts[color] += c;
    }
    e.color = Mode(counts);
  }

  const std::string surface_name = Mode(surface_votes);
  const ObjectEntry* surface =
      surface_name.empty() ? nullptr : registry.FindByName(surface_name);
  if (surface != nullptr) {
    const int sid = surface->object_id;
    std::rotate(registry.entries.begin(), registry.entries.begin() + sid,
                registry.entries.begin() + sid + 1);
    for (size_t i = 0; i < registry.entries.size(); ++i) {
      registry.entries[i].object_id = static_cast<int>(i);
    }
    registry.entries[0].is_surface = true;
    registry.entries[0].properties.movable = false;
    registry.surface_id = 0;
  }
  return registry;
}

std::string BuildPropertyPrompt(const ObjectRegistry& registry) {
  std::string names;
  for (const ObjectEntry& e : registry.entries) {
    if (!names.empty()) names += ", ";
    names += e.canonical_name;
  }
  return "You will be provided with a list of objects observed by a robot. "
         "For each object, decide whether the robot can move it (movable), "
         "whether other objects can be placed inside it (is_container), which "
         "discrete states it can be in (states, an empty list if none), and "
         "whether the robot can interact with it (interactable).\n\n"
         "Output valid json in the following format:\n"
         "[{\"name\": \"drawer\", \"movable\": false, \"is_container\": true, "
         "\"states\": [\"open\", \"closed\"], \"interactable\": true}]\n\n"
         "Objects: " +
         names;
}

std::vector<ObjectProperties> ParsePropertyResponse(
    const ObjectRegistry& registry, const std::string& raw) {
  const size_t marker = raw.rfind("***");
  const size_t from = marker == std::string::npos ? 0 : marker + 3;
  const size_t open = raw.find('[', from);
  const size_t close = raw.rfind(']');
  if (open == std::string::npos || close == std::string::npos || close < open) {
    throw ResponseError("property reply holds no JSON list", raw);
  }
  std::map<std::string, ObjectProperties> by_name;
  try {
    const auto list = nlohmann::json::parse(raw.substr(open, close - open + 1));
    for (const auto& item : list) {
      ObjectProperties p;
      p.movable = item.at("movable").get<bool>();
      p.is_container = item.at("is_container").get<bool>();
      p.states = item.at("states").get<std::vector<std::string>>();
      p.interactable = item.at("interactable").get<bool>();
      by_name[NormalizeText(item.at("name").get<std::string>())] = std::move(p);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ResponseError(std::string("malformed property reply: ") + e.what(), raw);
  }
  std::vector<ObjectProperties> out;
  for (const ObjectEntry& e : registry.entries) {
    auto it = by_name.find(NormalizeText(e.canonical_name));
    if (it == by_name.end()) {
      throw ResponseError("property reply misses '" + e.canonical_name + "'", raw);
    }
    out.push_back(it->second);
  }
  return out;
}

std::string RenderPropertyResponse(const std::vector<std::string>& names,
                                   const std::vector<ObjectProperties>& props) {
  nlohmann::ordered_json list = nlohmann::ordered_json::array();
  for (size_t i = 0; i < names.size() && i < props.size(); ++i) {
    list.push_back({{"name", names[i]},
                    {"movable", props[i].movable},
                    {"is_container", props[i].is_container},
                    {"states", props[i].states},
                    {"interactable", props[i].interactable}});
  }
  return list.dump();
}

ObjectRegistry AssignProperties(ObjectRegistry registry, LabelClient& llm) {
  if (registry.entries.empty()) {
    throw LabelError("cannot assign properties to an empty registry");
  }
  const std::string raw = llm.Ask(BuildPropertyPrompt(registry));
  std::vector<ObjectProperties> props = ParsePropertyResponse(registry, raw);
  for (size_t i = 0; i < registry.entries.size(); ++i) {
    registry.entries[i].properties = std::move(props[i]);
    if (registry.entries[i].is_surface) {
      registry.entries[i].properties.movable = false;
    }
  }
  return registry;
}

}  // namespace playseg
