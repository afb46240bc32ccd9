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

#include "playseg/artifacts.h"

#include <cstdio>

#include <nlohmann/json.hpp>

#include "playseg/error.h"
#include "playseg/stream.h"
#include "playseg/text.h"

namespace playseg {

namespace {

using Json = nlohmann::ordered_json;

struct Record {
  int64_t line;
  nlohmann::json j;
};

std::string Meta(std::string_view artifact, const std::string& episode_id, Json extra = Json::object()) {
  Json j;
  j["record"] = "meta";
  j["artifact"] = artifact;
  j["episode_id"] = episode_id;
  for (auto& [k, v] : extra.items()) j[k] = v;
  return j.dump() + "\n";
}

// Parses every non-blank line; the first must be the meta record of
// `artifact`.
std::vector<Record> ReadRecords(const std::string& text, std::string_view artifact,
                                nlohmann::json* meta) {
  std::vector<Record> out;
  int64_t line_no = 0;
  bool seen_meta = false;
  for (const std::string& raw : Split(text, '\n')) {
    ++line_no;
    if (Trim(raw).empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(raw);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("malformed JSON: ") + e.what(), line_no);
    }
    if (!j.is_object() || !j.contains("record") || !j["record"].is_string()) {
      throw ParseError("record lacks a \"record\" key", line_no);
    }
    if (!seen_meta) {
      if (j["record"] != "meta" || j.value("artifact", "") != artifact) {
        throw ParseError("expected a " + std::string(artifact) + " meta record first", line_no);
      }
      seen_meta = true;
      if (meta != nullptr) *meta = j;
      continue;
    }
    out.push_back({line_no, std::move(j)});
  }
  if (!seen_meta) throw ParseError("empty " + std::string(artifact) + " file", 0);
  return out;
}

template <typename T>
T Field(const Record& r, const char* key) {
  auto it = r.j.find(key);
  if (it == r.j.end()) throw ParseError(std::string("missing key '") + key + "'", r.line);
  try {
    return it->get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ParseError(std::string("key '") + key + "' has the wrong type", r.line);
  }
}

template <typename T>
T FieldOr(const Record& r, const char* key, T fallback) {
  return r.j.contains(key) ? Field<T>(r, key) : fallback;
}

void ExpectKind(const Record& r, std::string_view kind) {
  if (r.j["record"] != kind) {
    throw ParseError("unexpected record '" + r.j["record"].get<std::string>() + "'", r.line);
  }
}

std::string Pad(std::string s, size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

}  // namespace

// ---------------------------------------------------------------------------

std::string SerializeRegistry(const std::string& episode_id, const ObjectRegistry& registry) {
  Json extra;
  if (registry.surface_id) extra["surface_id"] = *registry.surface_id;
  std::string out = Meta("registry", episode_id, extra);
  for (const ObjectEntry& e : registry.entries) {
    Json j;
    j["record"] = "object";
    j["object_id"] = e.object_id;
    j["canonical_name"] = e.canonical_name;
    j["synonyms"] = e.synonyms;
    j["color"] = e.color;
    j["movable"] = e.properties.movable;
    j["is_container"] = e.properties.is_container;
    j["states"] = e.properties.states;
    j["interactable"] = e.properties.interactable;
    j["is_surface"] = e.is_surface;
    j["representative_confidence"] = e.representative_confidence;
    out += j.dump() + "\n";
  }
  return out;
}

ObjectRegistry ParseRegistry(const std::string& text, std::string* episode_id) {
  nlohmann::json meta;
  ObjectRegistry reg;
  for (const Record& r : ReadRecords(text, "registry", &meta)) {
    ExpectKind(r, "object");
    ObjectEntry e;
    e.object_id = Field<int>(r, "object_id");
    e.canonical_name = Field<std::string>(r, "canonical_name");
    e.synonyms = FieldOr<std::vector<std::string>>(r, "synonyms", {});
    e.color = FieldOr<std::string>(r, "color", "");
    e.properties.movable = FieldOr<bool>(r, "movable", false);
    e.properties.is_container = FieldOr<bool>(r, "is_container", false);
    e.properties.states = FieldOr<std::vector<std::string>>(r, "states", {});
    e.properties.interactable = FieldOr<bool>(r, "interactable", false);
    e.is_surface = FieldOr<bool>(r, "is_surface", false);
    e.representative_confidence = FieldOr<double>(r, "representative_confidence", 0.0);
    if (e.object_id != static_cast<int>(reg.entries.size())) {
      throw ParseError("object ids must be dense and ordered", r.line);
    }
    reg.entries.push_back(std::move(e));
  }
  if (meta.contains("surface_id")) reg.surface_id = meta["surface_id"].get<int>();
  if (episode_id != nullptr) *episode_id = meta.value("episode_id", "");
  ValidateRegistry(reg);
  return reg;
}

// ---------------------------------------------------------------------------

std::string SerializeObservations(const std::string& episode_id, const ObservationLog& log) {
  std::string out = Meta("observations", episode_id);
  for (const Observation& o : log) {
    Json j;
    j["record"] = "observation";
    j["frame"] = o.frame_index;
    j["object_id"] = o.object_id;
    j["kind"] = KindName(o.kind);
    j["text"] = o.text;
    j["confidence"] = o.confidence;
    out += j.dump() + "\n";
  }
  return out;
}

ObservationLog ParseObservations(const std::string& text, std::string* episode_id) {
  nlohmann::json meta;
  ObservationLog log;
  for (const Record& r : ReadRecords(text, "observations", &meta)) {
    ExpectKind(r, "observation");
    Observation o;
    o.frame_index = Field<int64_t>(r, "frame");
    o.object_id = Field<int>(r, "object_id");
    const std::string kind = Field<std::string>(r, "kind");
    const auto k = KindFromName(kind);
    if (!k) throw ParseError("unknown observation kind '" + kind + "'", r.line);
    o.kind = *k;
    o.text = Field<std::string>(r, "text");
    o.confidence = FieldOr<double>(r, "confidence", 1.0);
    log.push_back(std::move(o));
  }
  if (episode_id != nullptr) *episode_id = meta.value("episode_id", "");
  return log;
}

// ---------------------------------------------------------------------------

std::string SerializeKeystates(const KeystateFile& file) {
  Json extra;
  Json weights = Json::object();
  for (const auto& [h, w] : file.weights) weights[std::string(HeuristicName(h))] = w;
  extra["weights"] = weights;
  extra["weights_normalization"] = "renormalized over enabled heuristics with available signals";
  extra["theta"] = file.theta;
  extra["window"] = file.window;
  std::string out = Meta("keystates", file.episode_id, extra);
  for (const Keystate& k : file.keystates) {
    Json j;
    j["record"] = "keystate";
    j["frame"] = k.frame_index;
    j["object_id"] = k.object_id;
    j["score"] = k.score;
    Json comps = Json::object();
    for (const auto& [h, s] : k.components) comps[std::string(HeuristicName(h))] = s;
    j["heuristics"] = comps;
    j["first_frame"] = k.first_frame;
    j["alternates"] = k.alternates;
    out += j.dump() + "\n";
  }
  return out;
}

KeystateFile ParseKeystates(const std::string& text) {
  nlohmann::json meta;
  KeystateFile f;
  for (const Record& r : ReadRecords(text, "keystates", &meta)) {
    ExpectKind(r, "keystate");
    Keystate k;
    k.frame_index = Field<int64_t>(r, "frame");
    k.object_id = Field<int>(r, "object_id");
    k.score = Field<double>(r, "score");
    for (const auto& [name, s] : FieldOr<std::map<std::string, double>>(r, "heuristics", {})) {
      const auto h = HeuristicFromName(name);
      if (!h) throw ParseError("unknown heuristic '" + name + "'", r.line);
      k.components[*h] = s;
    }
    k.first_frame = FieldOr<int64_t>(r, "first_frame", k.frame_index);
    k.alternates = FieldOr<std::vector<int>>(r, "alternates", {});
    f.keystates.push_back(std::move(k));
  }
  f.episode_id = meta.value("episode_id", "");
  f.theta = meta.value("theta", 0.25);
  f.window = meta.value("window", 8);
  if (meta.contains("weights")) {
    for (const auto& [name, w] : meta["weights"].items()) {
      const auto h = HeuristicFromName(name);
      if (!h) throw ParseError("unknown heuristic '" + name + "'", 1);
      f.weights[*h] = w.get<double>();
    }
  }
  return f;
}

// ---------------------------------------------------------------------------

std::string SerializeLabels(const LabelFile& file) {
  std::string out = Meta("labels", file.episode_id);
  for (const LabeledSegment& s : file.labels.segments) {
    std::vector<std::string> confs;
    for (double c : s.confidences) confs.push_back(FormatDouble(c));
    Json j;
    j["record"] = "segment";
    j["start"] = s.start_frame;
    j["end"] = s.end_frame;
    j["object_id"] = s.focus_object_id;
    j["tasks"] = Join(s.tasks, ";");
    j["confidences"] = Join(confs, ",");
    j["ambiguous"] = s.ambiguous;
    j["alternates"] = s.alternates;
    out += j.dump() + "\n";
  }
  for (const std::string& reason : file.labels.skipped) {
    Json j;
    j["record"] = "skipped";
    j["reason"] = reason;
    out += j.dump() + "\n";
  }
  return out;
}

LabelFile ParseLabels(const std::string& text) {
  nlohmann::json meta;
  LabelFile f;
  for (const Record& r : ReadRecords(text, "labels", &meta)) {
    if (r.j["record"] == "skipped") {
      f.labels.skipped.push_back(Field<std::string>(r, "reason"));
      continue;
    }
    ExpectKind(r, "segment");
    LabeledSegment s;
    s.start_frame = Field<int64_t>(r, "start");
    s.end_frame = Field<int64_t>(r, "end");
    s.focus_object_id = Field<int>(r, "object_id");
    const std::string tasks = Field<std::string>(r, "tasks");
    const std::string confs = Field<std::string>(r, "confidences");
    if (!tasks.empty()) s.tasks = Split(tasks, ';');
    if (!confs.empty()) {
      for (const std::string& c : Split(confs, ',')) {
        try {
          size_t used = 0;
          s.confidences.push_back(std::stod(c, &used));
          if (used != c.size()) throw std::invalid_argument(c);
        } catch (const std::exception&) {
          throw ParseError("bad confidence '" + c + "'", r.line);
        }
      }
    }
    if (s.tasks.size() != s.confidences.size()) {
      throw ParseError("tasks and confidences differ in count", r.line);
    }
    s.ambiguous = Field<bool>(r, "ambiguous");
    s.alternates = FieldOr<std::vector<int>>(r, "alternates", {});
    f.labels.segments.push_back(std::move(s));
  }
  f.episode_id = meta.value("episode_id", "");
  return f;
}

// ---------------------------------------------------------------------------

std::string SerializeTruth(const GroundTruth& truth) {
  std::string out = Meta("truth", truth.episode_id);
  for (const ObjectEntry& e : truth.registry.entries) {
    Json j;
    j["record"] = "object";
    j["object_id"] = e.object_id;
    j["name"] = e.canonical_name;
    j["synonyms"] = e.synonyms;
    j["color"] = e.color;
    j["movable"] = e.properties.movable;
    j["is_container"] = e.properties.is_container;
    j["states"] = e.properties.states;
    j["is_surface"] = e.is_surface;
    out += j.dump() + "\n";
  }
  for (const TaskLabel& t : truth.tasks) {
    Json j;
    j["record"] = "task";
    j["start"] = t.start;
    j["end"] = t.end;
    j["object"] = t.object;
    j["task"] = t.text;
    out += j.dump() + "\n";
  }
  return out;
}

GroundTruth ParseTruth(const std::string& text) {
  nlohmann::json meta;
  GroundTruth gt;
  for (const Record& r : ReadRecords(text, "truth", &meta)) {
    if (r.j["record"] == "object") {
      ObjectEntry e;
      e.object_id = Field<int>(r, "object_id");
      e.canonical_name = Field<std::string>(r, "name");
      e.synonyms = FieldOr<std::vector<std::string>>(r, "synonyms", {});
      e.color = FieldOr<std::string>(r, "color", "");
      e.properties.movable = FieldOr<bool>(r, "movable", false);
      e.properties.is_container = FieldOr<bool>(r, "is_container", false);
      e.properties.states = FieldOr<std::vector<std::string>>(r, "states", {});
      e.properties.interactable = true;
      e.is_surface = FieldOr<bool>(r, "is_surface", false);
      if (e.is_surface) gt.registry.surface_id = e.object_id;
      gt.registry.entries.push_back(std::move(e));
      continue;
    }
    ExpectKind(r, "task");
    TaskLabel t;
    t.start = Field<int64_t>(r, "start");
    t.end = Field<int64_t>(r, "end");
    t.object = FieldOr<std::string>(r, "object", "");
    t.text = Field<std::string>(r, "task");
    gt.keystates.push_back(t.end);
    gt.tasks.push_back(std::move(t));
  }
  gt.episode_id = meta.value("episode_id", "");
  return gt;
}

// ---------------------------------------------------------------------------

std::string EpisodeIdFromPath(const std::filesystem::path& path, std::string_view suffix) {
  const std::string name = path.filename().string();
  if (name.size() <= suffix.size() || !EndsWith(name, suffix)) return "";
  return name.substr(0, name.size() - suffix.size());
}

std::map<std::string, std::filesystem::path> ListArtifacts(const std::filesystem::path& dir,
                                                           std::string_view suffix) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) throw IoError(dir.string(), "not a directory");
  std::map<std::string, std::filesystem::path> out;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string id = EpisodeIdFromPath(entry.path(), suffix);
    if (!id.empty()) out.emplace(id, entry.path());
  }
  return out;
}

std::string PrettyPrint(const std::filesystem::path& path) {
  const std::string name = path.filename().string();
  char buf[256];
  std::string out;
  if (EndsWith(name, kRegistrySuffix)) {
    std::string id;
    const ObjectRegistry reg = ParseRegistry(ReadFile(path), &id);
    out += "registry of " + id + " (" + std::to_string(reg.entries.size()) + " objects)\n";
    for (const ObjectEntry& e : reg.entries) {
      std::string flags;
      if (e.is_surface) flags += " surface";
      if (e.properties.movable) flags += " movable";
      if (e.properties.is_container) flags += " container";
      if (!e.properties.states.empty()) flags += " states=" + Join(e.properties.states, "/");
      out += Pad(std::to_string(e.object_id), 4) + Pad(e.canonical_name, 18) +
             Pad(e.color, 10) + (e.synonyms.empty() ? "" : "aka " + Join(e.synonyms, ", ")) +
             flags + "\n";
    }
  } else if (EndsWith(name, kObservationsSuffix)) {
    std::string id;
    const ObservationLog log = ParseObservations(ReadFile(path), &id);
    out += "observations of " + id + " (" + std::to_string(log.size()) + ")\n";
    for (const Observation& o : log) {
      std::snprintf(buf, sizeof(buf), "%6lld  obj %-3d %-17s ", static_cast<long long>(o.frame_index),
                    o.object_id, std::string(KindName(o.kind)).c_str());
      out += buf + o.text + "\n";
    }
  } else if (EndsWith(name, kKeystatesSuffix)) {
    const KeystateFile f = ParseKeystates(ReadFile(path));
    out += "keystates of " + f.episode_id + " (theta " + FormatDouble(f.theta) + ", window " +
           std::to_string(f.window) + ")\n";
    for (const Keystate& k : f.keystates) {
      std::vector<std::string> hs;
      for (const auto& [h, s] : k.components) hs.push_back(std::string(HeuristicName(h)));
      std::snprintf(buf, sizeof(buf), "%6lld  obj %-3d score %.3f  ",
                    static_cast<long long>(k.frame_index), k.object_id, k.score);
      out += buf + Join(hs, ", ") + "\n";
    }
  } else if (EndsWith(name, kLabelsSuffix)) {
    const LabelFile f = ParseLabels(ReadFile(path));
    out += "labels of " + f.episode_id + " (" + std::to_string(f.labels.segments.size()) +
           " segments)\n";
    for (const LabeledSegment& s : f.labels.segments) {
      std::snprintf(buf, sizeof(buf), "%6lld-%-6lld obj %-3d %s", static_cast<long long>(s.start_frame),
                    static_cast<long long>(s.end_frame), s.focus_object_id, s.ambiguous ? "amb " : "    ");
      out += buf + Join(s.tasks, " | ") + "\n";
    }
    for (const std::string& reason : f.labels.skipped) out += "skipped " + reason + "\n";
  } else if (EndsWith(name, kTruthSuffix)) {
    const GroundTruth gt = ParseTruth(ReadFile(path));
    out += "ground truth of " + gt.episode_id + " (" + std::to_string(gt.tasks.size()) + " tasks)\n";
    for (const TaskLabel& t : gt.tasks) {
      std::snprintf(buf, sizeof(buf), "%6lld-%-6lld ", static_cast<long long>(t.start),
                    static_cast<long long>(t.end));
      out += buf + t.text + "\n";
    }
  } else if (EndsWith(name, kScriptSuffix)) {
    const Script s = LoadScript(path);
    out += "script " + s.episode_id + " seed " + std::to_string(s.seed) + ", " +
           std::to_string(s.num_frames) + " frames, " + std::to_string(s.objects.size()) +
           " objects\n";
    for (const ScriptTask& t : s.tasks) {
      std::snprintf(buf, sizeof(buf), "%6lld-%-6lld ", static_cast<long long>(t.start),
                    static_cast<long long>(t.end));
      out += buf + TaskText(t, s) + "\n";
    }
  } else if (EndsWith(name, kEpisodeSuffix)) {
    const Episode ep = LoadEpisode(path);
    size_t dets = 0, masks = 0, depth = 0, gripper = 0;
    for (const FrameRecord& f : ep.frames) {
      dets += f.detections.size();
      masks += f.masks.size();
      depth += f.depth ? 1 : 0;
      gripper += f.gripper ? 1 : 0;
    }
    out += "episode " + ep.episode_id + ": " + std::to_string(ep.frames.size()) + " frames, " +
           std::to_string(ep.width) + "x" + std::to_string(ep.height) + " at " +
           FormatDouble(ep.fps) + " fps\n";
    out += "detections " + std::to_string(dets) + ", masks " + std::to_string(masks) +
           ", depth frames " + std::to_string(depth) + ", gripper frames " +
           std::to_string(gripper) + "\n";
  } else {
    throw ParseError("unknown artifact type: " + name, 0);
  }
  return out;
}

}  // namespace playseg
