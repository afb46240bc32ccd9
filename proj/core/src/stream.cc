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

#include "playseg/stream.h"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "playseg/error.h"
#include "playseg/hashing.h"

namespace playseg {
namespace {

using Json = nlohmann::ordered_json;

bool IsScore(double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; }

Json BoxToJson(const Box& b) { return Json::array({b.x1, b.y1, b.x2, b.y2}); }

Box BoxFromJson(const Json& j, const char* field) {
  if (!j.is_array() || j.size() != 4) {
    throw Error(std::string(field) + " must be [x1, y1, x2, y2]");
  }
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(),
          j[3].get<double>()};
}

void CheckBox(const Box& b, const Episode& ep, const std::string& field,
              int64_t frame) {
  if (!(std::isfinite(b.x1) && std::isfinite(b.y1) && std::isfinite(b.x2) &&
        std::isfinite(b.y2))) {
    throw ValidationError(field, "non-finite coordinate", frame);
  }
  if (!b.IsValid()) throw ValidationError(field, "requires x1<x2 and y1<y2", frame);
  if (!b.Within(ep.width, ep.height)) {
    throw ValidationError(field, "box outside image bounds", frame);
  }
}

constexpr std::string_view kFrameKeys[] = {
    "frame_index", "detections",    "masks",        "depth_ref",
    "flow",        "gripper",       "vlm_proposals", "state_scores",
    "objectness_boxes"};

// Sidecar cache keyed by relative path so shared files share memory.
struct SidecarCache {
  std::filesystem::path root;
  std::unordered_map<std::string, std::shared_ptr<const Mask>> masks;
  std::unordered_map<std::string, std::shared_ptr<const DepthMap>> depths;

  std::shared_ptr<const Mask> LoadMask(const std::string& ref) {
    auto it = masks.find(ref);
    if (it != masks.end()) return it->second;
    const std::filesystem::path p = root / ref;
    std::shared_ptr<const Mask> m;
    try {
      m = std::make_shared<const Mask>(DecodeMaskSidecar(ReadFile(p)));
    } catch (const ParseError& e) {
      throw IoError(p.string(), e.what());
    }
    masks.emplace(ref, m);
    return m;
  }

  std::shared_ptr<const DepthMap> LoadDepth(const std::string& ref) {
    auto it = depths.find(ref);
    if (it != depths.end()) return it->second;
    const std::filesystem::path p = root / ref;
    std::shared_ptr<const DepthMap> d;
    try {
      d = std::make_shared<const DepthMap>(DecodeDepthSidecar(ReadFile(p)));
    } catch (const ParseError& e) {
      throw IoError(p.string(), e.what());
    }
    depths.emplace(ref, d);
    return d;
  }
};

FrameRecord FrameFromJson(const Json& j, SidecarCache& cache) {
  if (!j.is_object()) throw Error("frame record must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (std::find(std::begin(kFrameKeys), std::end(kFrameKeys), key) ==
        std::end(kFrameKeys)) {
      throw Error("unknown frame field '" + key + "'");
    }
  }
  FrameRecord f;
  if (!j.contains("frame_index")) throw Error("missing frame_index");
  f.frame_index = j.at("frame_index").get<int64_t>();
  if (j.contains("detections")) {
    for (const Json& d : j.at("detections")) {
      RawDetection det;
      det.name = d.at("name").get<std::string>();
      det.box = BoxFromJson(d.at("box"), "detections.box");
      det.confidence = d.at("confidence").get<double>();
      if (d.contains("alignment")) det.alignment = d.at("alignment").get<double>();
      f.detections.push_back(std::move(det));
    }
  }
  if (j.contains("masks")) {
    for (const Json& m : j.at("masks")) {
      MaskRecord rec;
      if (m.contains("object")) rec.object = m.at("object").get<std::string>();
      rec.mask = cache.LoadMask(m.at("ref").get<std::string>());
      f.masks.push_back(std::move(rec));
    }
  }
  if (j.contains("depth_ref")) {
    f.depth = cache.LoadDepth(j.at("depth_ref").get<std::string>());
  }
  if (j.contains("flow")) {
    f.flow_magnitude = j.at("flow").get<std::map<std::string, double>>();
  }
  if (j.contains("gripper")) {
    const Json& g = j.at("gripper");
    GripperRecord rec;
    rec.closed = g.at("closed").get<bool>();
    if (g.contains("end_effector_box")) {
      rec.end_effector_box = BoxFromJson(g.at("end_effector_box"), "gripper.end_effector_box");
    }
    f.gripper = rec;
  }
  if (j.contains("vlm_proposals")) {
    std::vector<VlmProposal> props;
    for (const Json& p : j.at("vlm_proposals")) {
      props.push_back({p.at("name").get<std::string>(),
                       p.contains("color") ? p.at("color").get<std::string>() : ""});
    }
    f.vlm_proposals = std::move(props);
  }
  if (j.contains("state_scores")) {
    f.state_scores =
        j.at("state_scores").get<std::map<std::string, StateScores>>();
  }
  if (j.contains("objectness_boxes")) {
    std::vector<ObjectnessBox> boxes;
    for (const Json& b : j.at("objectness_boxes")) {
      boxes.push_back({BoxFromJson(b.at("box"), "objectness_boxes.box"),
                       b.at("objectness").get<double>()});
    }
    f.objectness_boxes = std::move(boxes);
  }
  return f;
}

}  // namespace

const Mask* FrameRecord::FindMask(const std::string& object) const {
  for (const MaskRecord& m : masks) {
    if (m.object == object) return m.mask.get();
  }
  return nullptr;
}

bool operator==(const FrameRecord& a, const FrameRecord& b) {
  const bool depth_eq =
      a.depth == b.depth || (a.depth && b.depth && *a.depth == *b.depth);
  return a.frame_index == b.frame_index && a.detections == b.detections &&
         a.masks == b.masks && depth_eq && a.flow_magnitude == b.flow_magnitude &&
         a.gripper == b.gripper && a.vlm_proposals == b.vlm_proposals &&
         a.state_scores == b.state_scores &&
         a.objectness_boxes == b.objectness_boxes;
}

double Episode::Diagonal() const {
  return std::hypot(static_cast<double>(width), static_cast<double>(height));
}

int64_t Episode::PositionOf(int64_t frame_index) const {
  auto it = std::lower_bound(
      frames.begin(), frames.end(), frame_index,
      [](const FrameRecord& f, int64_t v) { return f.frame_index < v; });
  if (it == frames.end() || it->frame_index != frame_index) return -1;
  return it - frames.begin();
}

void ValidateEpisode(const Episode& ep) {
  if (ep.episode_id.empty()) throw ValidationError("episode_id", "must not be empty");
  if (ep.width == 0 || ep.height == 0) {
    throw ValidationError("image_size", "width and height must be positive");
  }
  if (!(ep.fps > 0.0) || !std::isfinite(ep.fps)) {
    throw ValidationError("fps", "must be positive");
  }
  if (ep.frames.empty()) throw ValidationError("frames", "episode has no frames");
  int64_t prev = -1;
  for (const FrameRecord& f : ep.frames) {
    const int64_t fi = f.frame_index;
    if (fi < 0) throw ValidationError("frame_index", "must be non-negative", fi);
    if (fi <= prev) throw ValidationError("frame_index", "frame_index not increasing", fi);
    prev = fi;
    std::set<std::string> names;
    for (const RawDetection& d : f.detections) {
      if (d.name.empty()) throw ValidationError("detections.name", "empty name", fi);
      CheckBox(d.box, ep, "detections.box", fi);
      if (!IsScore(d.confidence)) {
        throw ValidationError("detections.confidence", "not in [0,1]", fi);
      }
      if (d.alignment && !IsScore(*d.alignment)) {
        throw ValidationError("detections.alignment", "not in [0,1]", fi);
      }
      names.insert(d.name);
    }
    for (const MaskRecord& m : f.masks) {
      if (!m.mask) throw ValidationError("masks.ref", "missing mask data", fi);
      if (m.mask->width() != ep.width || m.mask->height() != ep.height) {
        throw ValidationError("masks", "mask size differs from image_size", fi);
      }
      if (!m.object.empty() && m.object != kRobotMaskKey && !names.count(m.object)) {
        throw ValidationError("masks.object",
                              "'" + m.object + "' is not a detection in this frame", fi);
      }
    }
    if (f.depth) {
      if (f.depth->width != ep.width || f.depth->height != ep.height) {
        throw ValidationError("depth_ref", "depth size differs from image_size", fi);
      }
      for (float v : f.depth->values) {
        if (!IsScore(v)) throw ValidationError("depth_ref", "depth value not in [0,1]", fi);
      }
    }
    if (f.flow_magnitude) {
      for (const auto& [key, v] : *f.flow_magnitude) {
        if (!std::isfinite(v) || v < 0.0) {
          throw ValidationError("flow", "magnitude for '" + key + "' must be >= 0", fi);
        }
      }
    }
    if (f.gripper && f.gripper->end_effector_box) {
      CheckBox(*f.gripper->end_effector_box, ep, "gripper.end_effector_box", fi);
    }
    if (f.state_scores) {
      for (const auto& [key, scores] : *f.state_scores) {
        for (const auto& [state, v] : scores) {
          if (!IsScore(v)) {
            throw ValidationError("state_scores",
                                  key + "." + state + " not in [0,1]", fi);
          }
        }
      }
    }
    if (f.objectness_boxes) {
      for (const ObjectnessBox& b : *f.objectness_boxes) {
        CheckBox(b.box, ep, "objectness_boxes.box", fi);
        if (!IsScore(b.objectness)) {
          throw ValidationError("objectness_boxes.objectness", "not in [0,1]", fi);
        }
      }
    }
  }
}

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string(), "cannot open for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError(path.string(), "read failed");
  return ss.str();
}

void WriteFile(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  out.flush();
  if (!out) throw IoError(path.string(), "write failed");
}

Episode LoadEpisode(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path.string(), "cannot open episode index");
  SidecarCache cache;
  cache.root = path.parent_path();
  Episode ep;
  std::string line;
  int64_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const Json j = Json::parse(line);
      if (!have_header) {
        if (!j.is_object() || !j.contains("episode_id")) {
          throw Error("first record must be the episode header");
        }
        ep.episode_id = j.at("episode_id").get<std::string>();
        const Json& size = j.at("image_size");
        ep.width = size.at(0).get<uint32_t>();
        ep.height = size.at(1).get<uint32_t>();
        ep.fps = j.at("fps").get<double>();
        have_header = true;
        continue;
      }
      ep.frames.push_back(FrameFromJson(j, cache));
    } catch (const IoError&) {
      throw;
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(e.what(), line_no);
    } catch (const ValidationError&) {
      throw;
    } catch (const Error& e) {
      throw ParseError(e.what(), line_no);
    }
  }
  if (!have_header) throw ParseError("missing episode header", line_no);
  ValidateEpisode(ep);
  return ep;
}

void SaveEpisode(const Episode& ep, const std::filesystem::path& path) {
  const std::filesystem::path root = path.parent_path();
  std::error_code ec;
  for (const char* sub : {"masks", "depth"}) {
    std::filesystem::create_directories(root / sub, ec);
    if (ec) throw IoError((root / sub).string(), ec.message());
  }
  std::set<std::string> written;
  const auto write_sidecar = [&](const std::string& dir, const std::string& ext,
                                 const std::string& bytes) {
    const std::string ref = dir + "/" + Sha256Hex(bytes).substr(0, 20) + ext;
    if (written.insert(ref).second) WriteFile(root / ref, bytes);
    return ref;
  };
  // Depth maps shared across frames are encoded once.
  std::unordered_map<const DepthMap*, std::string> depth_refs;
  std::unordered_map<const Mask*, std::string> mask_refs;

  std::ostringstream out;
  Json header;
  header["episode_id"] = ep.episode_id;
  header["image_size"] = Json::array({ep.width, ep.height});
  header["fps"] = ep.fps;
  out << header.dump() << '\n';
  for (const FrameRecord& f : ep.frames) {
    Json j;
    j["frame_index"] = f.frame_index;
    Json dets = Json::array();
    for (const RawDetection& d : f.detections) {
      Json dj;
      dj["name"] = d.name;
      dj["box"] = BoxToJson(d.box);
      dj["confidence"] = d.confidence;
      if (d.alignment) dj["alignment"] = *d.alignment;
      dets.push_back(std::move(dj));
    }
    j["detections"] = std::move(dets);
    if (!f.masks.empty()) {
      Json masks = Json::array();
      for (const MaskRecord& m : f.masks) {
        auto it = mask_refs.find(m.mask.get());
        if (it == mask_refs.end()) {
          it = mask_refs
                   .emplace(m.mask.get(),
                            write_sidecar("masks", ".rle", EncodeMaskSidecar(*m.mask)))
                   .first;
        }
        Json mj;
        if (!m.object.empty()) mj["object"] = m.object;
        mj["ref"] = it->second;
        masks.push_back(std::move(mj));
      }
      j["masks"] = std::move(masks);
    }
    if (f.depth) {
      auto it = depth_refs.find(f.depth.get());
      if (it == depth_refs.end()) {
        it = depth_refs
                 .emplace(f.depth.get(),
                          write_sidecar("depth", ".depth", EncodeDepthSidecar(*f.depth)))
                 .first;
      }
      j["depth_ref"] = it->second;
    }
    if (f.flow_magnitude) j["flow"] = *f.flow_magnitude;
    if (f.gripper) {
      Json g;
      g["closed"] = f.gripper->closed;
      if (f.gripper->end_effector_box) {
        g["end_effector_box"] = BoxToJson(*f.gripper->end_effector_box);
      }
      j["gripper"] = std::move(g);
    }
    if (f.vlm_proposals) {
      Json props = Json::array();
      for (const VlmProposal& p : *f.vlm_proposals) {
        props.push_back({{"name", p.name}, {"color", p.color}});
      }
      j["vlm_proposals"] = std::move(props);
    }
    if (f.state_scores) j["state_scores"] = *f.state_scores;
    if (f.objectness_boxes) {
      Json boxes = Json::array();
      for (const ObjectnessBox& b : *f.objectness_boxes) {
        boxes.push_back({{"box", BoxToJson(b.box)}, {"objectness", b.objectness}});
      }
      j["objectness_boxes"] = std::move(boxes);
    }
    out << j.dump() << '\n';
  }
  WriteFile(path, out.str());
}

}  // namespace playseg
