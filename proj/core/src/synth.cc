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

#include "playseg/synth.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>

#include <nlohmann/json.hpp>

#include "playseg/error.h"
#include "playseg/labeler.h"
#include "playseg/observations.h"
#include "playseg/text.h"

namespace playseg {

namespace {

using Eigen::Vector2d;
using Eigen::Vector3d;

constexpr double kHalfR = 0.2;
constexpr double kHalfS = 0.3;
constexpr double kTableDepth = 0.7;
constexpr double kDrawerTravel = 0.06;
constexpr double kGripperHalf = 8.0;
constexpr double kRetractStep = 20.0;
constexpr double kGripperRestY = 12.0;
constexpr double kStateConf = 0.9;
constexpr int kPathSamples = 24;
constexpr double kMaxPathIou = 0.25;

// Camera-frame geometry of the table plane.
class Scene {
 public:
  explicit Scene(const Script& s)
      : intr_(Intrinsics::Default(s.width, s.height)), width_(s.width), height_(s.height) {}

  const Intrinsics& intrinsics() const { return intr_; }

  Vector3d World(double r, double s, double h) const {
    return center_ + r * right_ + s * front_ + h * up_;
  }

  Vector2d Project(const Vector3d& p) const {
    return {intr_.fx * p.x() / p.z() + intr_.cx, intr_.fy * p.y() / p.z() + intr_.cy};
  }

  // Camera z where the pixel ray meets the table plane, or +inf above the
  // horizon.
  double PlaneDepth(double v) const {
    const double dy = (v - intr_.cy) / intr_.fy;
    const double denom = -up_.y() * dy - up_.z();
    const double num = -up_.dot(center_);
    if (denom <= 1e-9) return std::numeric_limits<double>::infinity();
    return num / denom;
  }

  // Table coordinates of the plane point seen at pixel `px`.
  std::optional<Vector2d> ImageToTable(const Vector2d& px) const {
    const double z = PlaneDepth(px.y());
    if (!std::isfinite(z)) return std::nullopt;
    const Vector3d p((px.x() - intr_.cx) / intr_.fx * z, (px.y() - intr_.cy) / intr_.fy * z, z);
    return Vector2d((p - center_).dot(right_), (p - center_).dot(front_));
  }

  // (right, front) of a camera-frame point in the table frame.
  Vector2d Local(const Vector3d& p) const {
    return {(p - center_).dot(right_), (p - center_).dot(front_)};
  }

  Vector3d Backproject(const Vector2d& px, double z) const {
    return {(px.x() - intr_.cx) / intr_.fx * z, (px.y() - intr_.cy) / intr_.fy * z, z};
  }

  uint32_t width() const { return width_; }
  uint32_t height() const { return height_; }

 private:
  Intrinsics intr_;
  uint32_t width_, height_;
  Vector3d center_{0.0, 0.0, kTableDepth};
  Vector3d right_{1.0, 0.0, 0.0};
  Vector3d front_{0.0, 0.6, -0.8};
  Vector3d up_{0.0, -0.8, -0.6};
};

// Footprint center and extent including drawer travel.
struct Footprint {
  Vector2d center;
  Vector3d size;
};

Footprint FootprintOf(const ScriptObject& o, const Vector2d& p, double openness) {
  Footprint f{p, o.size};
  if (!o.states.empty()) {
    f.center.y() += 0.5 * kDrawerTravel * openness;
    f.size.y() += kDrawerTravel * openness;
  }
  return f;
}

Box BoxOf(const Scene& scene, const Footprint& f) {
  Box b{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
        -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (int i = 0; i < 8; ++i) {
    const double r = f.center.x() + ((i & 1) ? 0.5 : -0.5) * f.size.x();
    const double s = f.center.y() + ((i & 2) ? 0.5 : -0.5) * f.size.y();
    const double h = (i & 4) ? f.size.z() : 0.0;
    const Vector2d px = scene.Project(scene.World(r, s, h));
    b.x1 = std::min(b.x1, px.x());
    b.y1 = std::min(b.y1, px.y());
    b.x2 = std::max(b.x2, px.x());
    b.y2 = std::max(b.y2, px.y());
  }
  return b;
}

double TopDepth(const Scene& scene, const Footprint& f) {
  return scene.World(f.center.x(), f.center.y(), f.size.z()).z();
}

// Where the object's backprojected box centroid lands in the table frame.
Vector2d ExpectedLocal(const Scene& scene, const ScriptObject& o, const Vector2d& p,
                       double openness = 0.0) {
  const Footprint f = FootprintOf(o, p, openness);
  return scene.Local(scene.Backproject(BoxOf(scene, f).Center(), TopDepth(scene, f)));
}

Vector2d BottomCenterOnTable(const Scene& scene, const ScriptObject& o, const Vector2d& p) {
  const Box b = BoxOf(scene, FootprintOf(o, p, 0.0));
  return scene.ImageToTable(b.BottomCenter()).value_or(p);
}

Vector2d GridPoint(const Vector2d& table) {
  return {(table.x() + kHalfR) / (2 * kHalfR), (table.y() + kHalfS) / (2 * kHalfS)};
}

Vector2d TableFromGrid(const Vector2d& g) {
  return {g.x() * 2 * kHalfR - kHalfR, g.y() * 2 * kHalfS - kHalfS};
}

Box ClipToImage(const Box& b, double w, double h) {
  return {std::clamp(b.x1, 0.0, w), std::clamp(b.y1, 0.0, h), std::clamp(b.x2, 0.0, w),
          std::clamp(b.y2, 0.0, h)};
}

Vector2d GraspPoint(const ScriptObject& o, const Box& b) {
  if (!o.states.empty()) return {0.5 * (b.x1 + b.x2), b.y2 - 6.0};
  return b.Center();
}

Vector2d Lerp(const Vector2d& a, const Vector2d& b, double t) { return a + (b - a) * t; }

bool BoxesOverlap(const Box& a, const Box& b, double margin) {
  return a.x1 - margin < b.x2 && b.x1 - margin < a.x2 && a.y1 - margin < b.y2 &&
         b.y1 - margin < a.y2;
}

const std::vector<std::string> kSides = {"left", "right", "front", "back"};

Vector2d SideAxis(const std::string& side) {
  if (side == "left") return {-1.0, 0.0};
  if (side == "right") return {1.0, 0.0};
  if (side == "front") return {0.0, 1.0};
  return {0.0, -1.0};
}

std::vector<std::string> LowerNames(const ScriptObject& o) {
  std::vector<std::string> out{ToLower(o.name)};
  for (const std::string& s : o.synonyms) out.push_back(ToLower(s));
  return out;
}

// Simulated drawer states and positions at the start of each task.
struct Layout {
  std::vector<Vector2d> positions;
  std::vector<double> openness;
  std::vector<std::string> states;
};

Layout InitialLayout(const Script& s) {
  Layout l;
  for (const ScriptObject& o : s.objects) {
    l.positions.push_back(o.position);
    const std::string state = o.states.empty() ? "" : o.initial_state;
    l.states.push_back(state);
    l.openness.push_back(state == "open" ? 1.0 : 0.0);
  }
  return l;
}

size_t IndexOf(const Script& s, const std::string& name) {
  for (size_t i = 0; i < s.objects.size(); ++i) {
    if (s.objects[i].name == name) return i;
  }
  return s.objects.size();
}

// ---------------------------------------------------------------------------
// Script records.

nlohmann::ordered_json ObjectJson(const ScriptObject& o, bool surface) {
  nlohmann::ordered_json j;
  j["record"] = surface ? "surface" : "object";
  j["name"] = o.name;
  j["synonyms"] = o.synonyms;
  j["color"] = o.color;
  if (!surface) {
    j["movable"] = o.movable;
    j["container"] = o.container;
    j["states"] = o.states;
    j["initial_state"] = o.initial_state;
    j["position"] = {o.position.x(), o.position.y()};
    j["size"] = {o.size.x(), o.size.y(), o.size.z()};
  }
  return j;
}

void CheckKeys(const nlohmann::json& j, const std::set<std::string>& allowed, int64_t line) {
  for (const auto& [key, value] : j.items()) {
    if (allowed.count(key) == 0) throw ParseError("unknown key '" + key + "'", line);
  }
}

template <typename T>
T Get(const nlohmann::json& j, const char* key, int64_t line) {
  auto it = j.find(key);
  if (it == j.end()) throw ParseError(std::string("missing key '") + key + "'", line);
  try {
    return it->get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ParseError(std::string("key '") + key + "' has the wrong type", line);
  }
}

template <typename T>
T GetOr(const nlohmann::json& j, const char* key, T fallback, int64_t line) {
  return j.contains(key) ? Get<T>(j, key, line) : fallback;
}

}  // namespace

// ---------------------------------------------------------------------------

std::string_view TaskKindName(TaskKind kind) {
  switch (kind) {
    case TaskKind::kPickPlace: return "pick_place";
    case TaskKind::kOpen: return "open";
    case TaskKind::kClose: return "close";
    case TaskKind::kMoveCell: return "move_cell";
  }
  return "";
}

std::optional<TaskKind> TaskKindFromName(std::string_view name) {
  for (TaskKind k : {TaskKind::kPickPlace, TaskKind::kOpen, TaskKind::kClose,
                     TaskKind::kMoveCell}) {
    if (TaskKindName(k) == name) return k;
  }
  return std::nullopt;
}

const ScriptObject* Script::FindObject(const std::string& name) const {
  for (const ScriptObject& o : objects) {
    if (o.name == name) return &o;
  }
  return nullptr;
}

void ValidateScript(const Script& s) {
  if (s.width < 64 || s.height < 64) throw ValidationError("image_size", "must be at least 64x64");
  if (!(s.fps > 0.0)) throw ValidationError("fps", "must be positive");
  if (s.num_frames <= 0) throw ValidationError("num_frames", "must be positive");
  if (s.surface.name.empty()) throw ValidationError("surface.name", "must not be empty");
  std::set<std::string> names{s.surface.name};
  for (const ScriptObject& o : s.objects) {
    const std::string field = "objects." + o.name;
    if (o.name.empty()) throw ValidationError("objects.name", "must not be empty");
    if (!names.insert(o.name).second) throw ValidationError(field, "declared twice");
    for (const std::string& syn : o.synonyms) {
      if (!names.insert(syn).second) throw ValidationError(field + ".synonyms", "'" + syn + "' is not unique");
    }
    if (!(o.size.array() > 0.0).all()) throw ValidationError(field + ".size", "must be positive");
    if (std::abs(o.position.x()) > kHalfR || std::abs(o.position.y()) > kHalfS) {
      throw ValidationError(field + ".position", "off the table");
    }
    if (!o.states.empty() &&
        std::find(o.states.begin(), o.states.end(), o.initial_state) == o.states.end()) {
      throw ValidationError(field + ".initial_state", "not among the states");
    }
    if (!o.states.empty() && o.movable) {
      throw ValidationError(field, "objects with states must be immovable");
    }
  }

  Layout layout = InitialLayout(s);
  int64_t previous_end = -1;
  for (size_t k = 0; k < s.tasks.size(); ++k) {
    const ScriptTask& t = s.tasks[k];
    const std::string field = "tasks[" + std::to_string(k) + "]";
    if (t.start <= previous_end) throw ValidationError(field + ".start", "spans must be ordered and disjoint");
    if (t.end - t.start - (kApproachFrames - 1) < kMinManipulationFrames) {
      throw ValidationError(field + ".end", "span too short");
    }
    if (t.end >= s.num_frames) throw ValidationError(field + ".end", "beyond the last frame");
    previous_end = t.end;
    const size_t i = IndexOf(s, t.object);
    if (i == s.objects.size()) throw ValidationError(field + ".object", "undeclared object '" + t.object + "'");
    const ScriptObject& o = s.objects[i];
    switch (t.kind) {
      case TaskKind::kPickPlace:
      case TaskKind::kMoveCell: {
        if (!o.movable) throw ValidationError(field + ".object", "not movable");
        if (!t.destination) throw ValidationError(field + ".destination", "required");
        if (std::abs(t.destination->x()) > kHalfR || std::abs(t.destination->y()) > kHalfS) {
          throw ValidationError(field + ".destination", "off the table");
        }
        if (t.kind == TaskKind::kPickPlace) {
          if (IndexOf(s, t.reference) == s.objects.size() || t.reference == t.object) {
            throw ValidationError(field + ".reference", "must name another declared object");
          }
          if (std::find(kSides.begin(), kSides.end(), t.side) == kSides.end()) {
            throw ValidationError(field + ".side", "expected left, right, front or back");
          }
        } else {
          const auto& labels = GridCellLabels();
          if (std::find(labels.begin(), labels.end(), t.cell) == labels.end()) {
            throw ValidationError(field + ".cell", "unknown grid cell '" + t.cell + "'");
          }
        }
        layout.positions[i] = *t.destination;
        break;
      }
      case TaskKind::kOpen:
      case TaskKind::kClose: {
        const std::string from = t.kind == TaskKind::kOpen ? "closed" : "open";
        const std::string to = t.kind == TaskKind::kOpen ? "open" : "closed";
        const bool has = std::find(o.states.begin(), o.states.end(), from) != o.states.end() &&
                         std::find(o.states.begin(), o.states.end(), to) != o.states.end();
        if (!has) throw ValidationError(field + ".object", "lacks the open and closed states");
        if (layout.states[i] != from) {
          throw ValidationError(field + ".kind", t.object + " is already " + layout.states[i]);
        }
        layout.states[i] = to;
        break;
      }
    }
  }
}

std::string SerializeScript(const Script& s) {
  std::string out;
  nlohmann::ordered_json head;
  head["record"] = "episode";
  head["episode_id"] = s.episode_id;
  head["seed"] = s.seed;
  head["image_size"] = {s.width, s.height};
  head["fps"] = s.fps;
  head["num_frames"] = s.num_frames;
  out += head.dump() + "\n";
  nlohmann::ordered_json noise;
  noise["record"] = "noise";
  noise["box_sigma"] = s.noise.box_sigma;
  noise["dropout"] = s.noise.dropout;
  noise["synonym_rate"] = s.noise.synonym_rate;
  noise["spurious_rate"] = s.noise.spurious_rate;
  out += noise.dump() + "\n";
  out += ObjectJson(s.surface, true).dump() + "\n";
  for (const ScriptObject& o : s.objects) out += ObjectJson(o, false).dump() + "\n";
  for (const ScriptTask& t : s.tasks) {
    nlohmann::ordered_json j;
    j["record"] = "task";
    j["kind"] = TaskKindName(t.kind);
    j["object"] = t.object;
    if (t.kind == TaskKind::kPickPlace) {
      j["reference"] = t.reference;
      j["side"] = t.side;
    }
    if (t.kind == TaskKind::kMoveCell) j["cell"] = t.cell;
    if (t.destination) j["destination"] = {t.destination->x(), t.destination->y()};
    j["start"] = t.start;
    j["end"] = t.end;
    out += j.dump() + "\n";
  }
  return out;
}

Script ParseScript(const std::string& text) {
  Script s;
  bool have_head = false, have_surface = false;
  int64_t line_no = 0;
  for (const std::string& raw : Split(text, '\n')) {
    ++line_no;
    const std::string line = Trim(raw);
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("malformed JSON: ") + e.what(), line_no);
    }
    if (!j.is_object()) throw ParseError("record must be a JSON object", line_no);
    const std::string kind = Get<std::string>(j, "record", line_no);
    if (kind == "episode") {
      CheckKeys(j, {"record", "episode_id", "seed", "image_size", "fps", "num_frames"}, line_no);
      s.episode_id = Get<std::string>(j, "episode_id", line_no);
      s.seed = Get<uint64_t>(j, "seed", line_no);
      const auto size = Get<std::vector<uint32_t>>(j, "image_size", line_no);
      if (size.size() != 2) throw ParseError("image_size needs two entries", line_no);
      s.width = size[0];
      s.height = size[1];
      s.fps = GetOr<double>(j, "fps", 30.0, line_no);
      s.num_frames = Get<int64_t>(j, "num_frames", line_no);
      have_head = true;
    } else if (kind == "noise") {
      CheckKeys(j, {"record", "box_sigma", "dropout", "synonym_rate", "spurious_rate"}, line_no);
      s.noise.box_sigma = GetOr<double>(j, "box_sigma", 0.0, line_no);
      s.noise.dropout = GetOr<double>(j, "dropout", 0.0, line_no);
      s.noise.synonym_rate = GetOr<double>(j, "synonym_rate", 0.0, line_no);
      s.noise.spurious_rate = GetOr<double>(j, "spurious_rate", 0.0, line_no);
    } else if (kind == "surface") {
      CheckKeys(j, {"record", "name", "synonyms", "color"}, line_no);
      s.surface.name = Get<std::string>(j, "name", line_no);
      s.surface.synonyms = GetOr<std::vector<std::string>>(j, "synonyms", {}, line_no);
      s.surface.color = GetOr<std::string>(j, "color", "", line_no);
      have_surface = true;
    } else if (kind == "object") {
      CheckKeys(j, {"record", "name", "synonyms", "color", "movable", "container", "states",
                    "initial_state", "position", "size"},
                line_no);
      ScriptObject o;
      o.name = Get<std::string>(j, "name", line_no);
      o.synonyms = GetOr<std::vector<std::string>>(j, "synonyms", {}, line_no);
      o.color = GetOr<std::string>(j, "color", "", line_no);
      o.movable = GetOr<bool>(j, "movable", true, line_no);
      o.container = GetOr<bool>(j, "container", false, line_no);
      o.states = GetOr<std::vector<std::string>>(j, "states", {}, line_no);
      o.initial_state = GetOr<std::string>(j, "initial_state", "", line_no);
      const auto pos = Get<std::vector<double>>(j, "position", line_no);
      if (pos.size() != 2) throw ParseError("position needs two entries", line_no);
      o.position = {pos[0], pos[1]};
      if (j.contains("size")) {
        const auto size = Get<std::vector<double>>(j, "size", line_no);
        if (size.size() != 3) throw ParseError("size needs three entries", line_no);
        o.size = {size[0], size[1], size[2]};
      }
      s.objects.push_back(std::move(o));
    } else if (kind == "task") {
      CheckKeys(j, {"record", "kind", "object", "reference", "side", "cell", "destination",
                    "start", "end"},
                line_no);
      ScriptTask t;
      const std::string kind_name = Get<std::string>(j, "kind", line_no);
      const auto k = TaskKindFromName(kind_name);
      if (!k) throw ParseError("unknown task kind '" + kind_name + "'", line_no);
      t.kind = *k;
      t.object = Get<std::string>(j, "object", line_no);
      t.reference = GetOr<std::string>(j, "reference", "", line_no);
      t.side = GetOr<std::string>(j, "side", "", line_no);
      t.cell = GetOr<std::string>(j, "cell", "", line_no);
      if (j.contains("destination")) {
        const auto d = Get<std::vector<double>>(j, "destination", line_no);
        if (d.size() != 2) throw ParseError("destination needs two entries", line_no);
        t.destination = Vector2d(d[0], d[1]);
      }
      t.start = Get<int64_t>(j, "start", line_no);
      t.end = Get<int64_t>(j, "end", line_no);
      s.tasks.push_back(std::move(t));
    } else {
      throw ParseError("unknown record '" + kind + "'", line_no);
    }
  }
  if (!have_head) throw ParseError("missing episode record", 0);
  if (!have_surface) throw ParseError("missing surface record", 0);
  ValidateScript(s);
  return s;
}

Script LoadScript(const std::filesystem::path& path) { return ParseScript(ReadFile(path)); }

void SaveScript(const Script& script, const std::filesystem::path& path) {
  WriteFile(path, SerializeScript(script));
}

// ---------------------------------------------------------------------------

Box ProjectObjectBox(const Script& script, const ScriptObject& object, const Vector2d& p) {
  return BoxOf(Scene(script), FootprintOf(object, p, 0.0));
}

std::string CellOf(const Script& script, const ScriptObject& object, const Vector2d& p) {
  return GridCell(GridPoint(BottomCenterOnTable(Scene(script), object, p)));
}

std::string TaskText(const ScriptTask& task, const Script& script) {
  const std::string obj = ToLower(task.object);
  switch (task.kind) {
    case TaskKind::kPickPlace: {
      const std::string ref = ToLower(task.reference);
      if (task.side == "front") return "place the " + obj + " in front of the " + ref;
      if (task.side == "back") return "place the " + obj + " behind the " + ref;
      return "place the " + obj + " to the " + task.side + " of the " + ref;
    }
    case TaskKind::kMoveCell:
      return "move the " + obj + " to the " + task.cell + " of the " + ToLower(script.surface.name);
    case TaskKind::kOpen: return "open the " + obj;
    case TaskKind::kClose: return "close the " + obj;
  }
  return "";
}

bool EvidenceMatches(const ScriptTask& task, const Script& script, const std::string& line) {
  const ScriptObject* o = script.FindObject(task.object);
  if (o == nullptr) return false;
  for (const std::string& obj : LowerNames(*o)) {
    switch (task.kind) {
      case TaskKind::kPickPlace: {
        const ScriptObject* ref = script.FindObject(task.reference);
        if (ref == nullptr) return false;
        for (const std::string& r : LowerNames(*ref)) {
          if (line == RenderMovedRelative(obj, task.side, r)) return true;
        }
        break;
      }
      case TaskKind::kMoveCell:
        for (const std::string& surface : LowerNames(script.surface)) {
          if (StartsWith(line, obj + " moved from ") &&
              EndsWith(line, " to " + task.cell + " of the " + surface)) {
            return true;
          }
        }
        break;
      case TaskKind::kOpen:
        if (line == RenderStateChange(obj, "closed", "open")) return true;
        break;
      case TaskKind::kClose:
        if (line == RenderStateChange(obj, "open", "closed")) return true;
        break;
    }
  }
  return false;
}

// ---------------------------------------------------------------------------

SynthOutput Generate(const Script& script) {
  ValidateScript(script);
  const Scene scene(script);
  const double w = script.width, h = script.height;
  std::mt19937_64 rng(script.seed ^ 0x5deece66dULL);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const NoiseModel& noise = script.noise;

  Layout layout = InitialLayout(script);
  const size_t n = script.objects.size();

  // Table mask from the initial layout with the objects cut out.
  const Footprint table_fp{Vector2d::Zero(), {2 * kHalfR, 2 * kHalfS, 0.0}};
  const Box table_box = BoxOf(scene, table_fp);
  std::shared_ptr<const Mask> table_mask;
  {
    std::array<Vector2d, 4> quad = {
        scene.Project(scene.World(-kHalfR, -kHalfS, 0)), scene.Project(scene.World(kHalfR, -kHalfS, 0)),
        scene.Project(scene.World(kHalfR, kHalfS, 0)), scene.Project(scene.World(-kHalfR, kHalfS, 0))};
    std::vector<Box> holes;
    for (size_t i = 0; i < n; ++i) {
      holes.push_back(BoxOf(scene, FootprintOf(script.objects[i], layout.positions[i],
                                               layout.openness[i]))
                          .Scaled(1.1));
    }
    std::vector<uint8_t> dense(static_cast<size_t>(script.width) * script.height, 0);
    for (uint32_t y = 0; y < script.height; ++y) {
      for (uint32_t x = 0; x < script.width; ++x) {
        const Vector2d p(x, y);
        bool inside = true;
        for (int k = 0; k < 4 && inside; ++k) {
          const Vector2d a = quad[k], b = quad[(k + 1) % 4];
          const double cross = (b.x() - a.x()) * (p.y() - a.y()) - (b.y() - a.y()) * (p.x() - a.x());
          inside = cross >= 0.0;
        }
        for (const Box& hole : holes) {
          if (inside && x >= hole.x1 && x < hole.x2 && y >= hole.y1 && y < hole.y2) inside = false;
        }
        dense[static_cast<size_t>(y) * script.width + x] = inside ? 1 : 0;
      }
    }
    table_mask = std::make_shared<const Mask>(Mask::FromDense(script.width, script.height, dense));
  }

  // Plane depth per row, clamped to the far wall at 1.
  std::vector<float> row_depth(script.height);
  for (uint32_t y = 0; y < script.height; ++y) {
    row_depth[y] = static_cast<float>(std::min(1.0, scene.PlaneDepth(y)));
  }

  Episode ep;
  ep.episode_id = script.episode_id;
  ep.width = script.width;
  ep.height = script.height;
  ep.fps = script.fps;

  Vector2d grip(0.5 * w, kGripperRestY);
  Vector2d grip_start = grip;
  Vector2d from = Vector2d::Zero();
  double open_from = 0.0;
  size_t task_i = 0;
  std::vector<Vector2d> prev_centers(n);
  std::vector<std::pair<Box, double>> prev_depth_key;
  std::shared_ptr<const DepthMap> prev_depth;

  for (int64_t t = 0; t < script.num_frames; ++t) {
    while (task_i < script.tasks.size() && script.tasks[task_i].end < t) ++task_i;
    const ScriptTask* task =
        task_i < script.tasks.size() && script.tasks[task_i].start <= t ? &script.tasks[task_i] : nullptr;
    bool closed = false;
    if (task != nullptr) {
      const size_t i = IndexOf(script, task->object);
      const ScriptObject& o = script.objects[i];
      if (t == task->start) {
        grip_start = grip;
        from = layout.positions[i];
        open_from = layout.openness[i];
      }
      const int64_t phase = t - task->start;
      if (phase < kApproachFrames) {
        const Box b = BoxOf(scene, FootprintOf(o, layout.positions[i], layout.openness[i]));
        grip = Lerp(grip_start, GraspPoint(o, b),
                    static_cast<double>(phase + 1) / static_cast<double>(kApproachFrames));
      } else {
        const double a = static_cast<double>(t - (task->start + kApproachFrames - 1)) /
                         static_cast<double>(task->end - (task->start + kApproachFrames - 1));
        if (task->destination) layout.positions[i] = Lerp(from, *task->destination, a);
        if (task->kind == TaskKind::kOpen) layout.openness[i] = open_from + (1.0 - open_from) * a;
        if (task->kind == TaskKind::kClose) layout.openness[i] = open_from * (1.0 - a);
        if ((task->kind == TaskKind::kOpen || task->kind == TaskKind::kClose) &&
            t >= std::max(task->end - 2, task->start + kApproachFrames)) {
          layout.states[i] = task->kind == TaskKind::kOpen ? "open" : "closed";
        }
        grip = GraspPoint(o, BoxOf(scene, FootprintOf(o, layout.positions[i], layout.openness[i])));
        closed = t < task->end;
      }
    } else {
      grip.y() = std::max(kGripperRestY, grip.y() - kRetractStep);
    }

    FrameRecord f;
    f.frame_index = t;
    std::vector<Box> boxes(n);
    std::vector<double> depths(n);
    std::map<std::string, double> flow{{script.surface.name, 0.0}};
    for (size_t i = 0; i < n; ++i) {
      const ScriptObject& o = script.objects[i];
      const Footprint fp = FootprintOf(o, layout.positions[i], layout.openness[i]);
      boxes[i] = BoxOf(scene, fp);
      depths[i] = TopDepth(scene, fp);
      const Vector2d c = o.states.empty() ? boxes[i].Center() : boxes[i].BottomCenter();
      flow[o.name] = t == 0 ? 0.0 : (c - prev_centers[i]).norm();
      prev_centers[i] = c;
    }
    f.flow_magnitude = flow;

    f.vlm_proposals.emplace();
    f.vlm_proposals->push_back({script.surface.name, script.surface.color});
    for (const ScriptObject& o : script.objects) f.vlm_proposals->push_back({o.name, o.color});

    f.objectness_boxes.emplace();
    auto detect = [&](const ScriptObject& o, const Box& truth, std::shared_ptr<const Mask> fixed_mask) {
      const double drop = unit(rng);
      const double syn = unit(rng);
      const size_t pick = o.synonyms.empty() ? 0 : rng() % o.synonyms.size();
      Box b = truth;
      if (noise.box_sigma > 0.0) {
        b.x1 += noise.box_sigma * gauss(rng);
        b.y1 += noise.box_sigma * gauss(rng);
        b.x2 += noise.box_sigma * gauss(rng);
        b.y2 += noise.box_sigma * gauss(rng);
      }
      b = ClipToImage(b, w, h);
      f.objectness_boxes->push_back({ClipToImage(truth, w, h), 0.9});
      if (drop < noise.dropout || !b.IsValid()) return;
      RawDetection d;
      d.name = o.name;
      d.confidence = 0.9;
      if (!o.synonyms.empty() && syn < noise.synonym_rate) {
        d.name = o.synonyms[pick];
        d.confidence = 0.6;
      }
      d.box = b;
      f.detections.push_back(d);
      f.masks.push_back({d.name, fixed_mask ? fixed_mask
                                            : std::make_shared<const Mask>(Mask::FromBox(ep.width, ep.height, b))});
    };
    detect(script.surface, ClipToImage(table_box, w, h), table_mask);
    for (size_t i = 0; i < n; ++i) detect(script.objects[i], boxes[i], nullptr);

    if (noise.spurious_rate > 0.0) {
      for (size_t i = 0; i < n; ++i) {
        const double roll = unit(rng);
        const Vector2d p(kHalfR * (2 * unit(rng) - 1) * 0.8, kHalfS * (2 * unit(rng) - 1) * 0.8);
        if (roll >= noise.spurious_rate) continue;
        const Box b = ClipToImage(BoxOf(scene, FootprintOf(script.objects[i], p, 0.0)), w, h);
        if (!b.IsValid()) continue;
        f.detections.push_back({script.objects[i].name, b, 0.3, std::nullopt});
        f.objectness_boxes->push_back({b, 0.05});
      }
    }

    bool any_states = false;
    std::map<std::string, StateScores> states;
    for (size_t i = 0; i < n; ++i) {
      const ScriptObject& o = script.objects[i];
      if (o.states.empty()) continue;
      any_states = true;
      StateScores& s = states[o.name];
      for (const std::string& st : o.states) {
        s[st] = st == layout.states[i] ? kStateConf : 1.0 - kStateConf;
      }
    }
    if (any_states) f.state_scores = std::move(states);

    f.gripper = GripperRecord{
        closed, ClipToImage(Box{grip.x() - kGripperHalf, grip.y() - kGripperHalf,
                                grip.x() + kGripperHalf, grip.y() + kGripperHalf},
                            w, h)};

    std::vector<std::pair<Box, double>> key;
    for (size_t i = 0; i < n; ++i) key.emplace_back(boxes[i], depths[i]);
    if (prev_depth && key == prev_depth_key) {
      f.depth = prev_depth;
    } else {
      auto depth = std::make_shared<DepthMap>();
      depth->width = script.width;
      depth->height = script.height;
      depth->values.resize(static_cast<size_t>(script.width) * script.height);
      for (uint32_t y = 0; y < script.height; ++y) {
        std::fill_n(depth->values.begin() + static_cast<ptrdiff_t>(y) * script.width, script.width,
                    row_depth[y]);
      }
      std::vector<size_t> order(n);
      for (size_t i = 0; i < n; ++i) order[i] = i;
      std::stable_sort(order.begin(), order.end(),
                       [&](size_t a, size_t b) { return depths[a] > depths[b]; });
      for (size_t i : order) {
        const Mask m = Mask::FromBox(script.width, script.height, ClipToImage(boxes[i], w, h));
        const float z = static_cast<float>(depths[i]);
        ForEachRowSpan(m, [&](uint32_t y, uint32_t x0, uint32_t x1) {
          std::fill(depth->values.begin() + static_cast<ptrdiff_t>(y) * script.width + x0,
                    depth->values.begin() + static_cast<ptrdiff_t>(y) * script.width + x1, z);
        });
      }
      prev_depth = depth;
      prev_depth_key = std::move(key);
      f.depth = prev_depth;
    }
    ep.frames.push_back(std::move(f));
  }

  SynthOutput out;
  out.episode = std::move(ep);
  GroundTruth& gt = out.truth;
  gt.episode_id = script.episode_id;
  ObjectEntry surface;
  surface.canonical_name = script.surface.name;
  surface.synonyms = script.surface.synonyms;
  surface.color = script.surface.color;
  surface.is_surface = true;
  surface.properties.interactable = true;  // objects are placed on it
  gt.registry.entries.push_back(surface);
  gt.registry.surface_id = 0;
  std::vector<const ScriptObject*> sorted;
  for (const ScriptObject& o : script.objects) sorted.push_back(&o);
  std::sort(sorted.begin(), sorted.end(),
            [](const ScriptObject* a, const ScriptObject* b) { return a->name < b->name; });
  for (const ScriptObject* o : sorted) {
    ObjectEntry e;
    e.object_id = static_cast<int>(gt.registry.entries.size());
    e.canonical_name = o->name;
    e.synonyms = o->synonyms;
    e.color = o->color;
    e.properties = {o->movable, o->container, o->states, true};
    gt.registry.entries.push_back(std::move(e));
  }
  for (const ScriptTask& t : script.tasks) {
    gt.keystates.push_back(t.end);
    gt.tasks.push_back({t.start, t.end, t.object, TaskText(t, script)});
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

struct Pool {
  const char* name;
  std::vector<std::string> synonyms;
  const char* color;
  Vector3d size;
};

const std::vector<Pool>& ObjectPool() {
  static const std::vector<Pool> pool = {
      {"red block", {"block"}, "red", {0.05, 0.05, 0.04}},
      {"blue cup", {"mug"}, "blue", {0.05, 0.05, 0.06}},
      {"green bowl", {"bowl"}, "green", {0.08, 0.07, 0.04}},
      {"yellow banana", {"banana"}, "yellow", {0.08, 0.04, 0.03}},
      {"pot", {"saucepan"}, "silver", {0.09, 0.08, 0.05}},
      {"spoon", {"ladle"}, "silver", {0.07, 0.03, 0.02}},
      {"towel", {"dishrag"}, "white", {0.08, 0.06, 0.01}},
      {"orange", {"fruit"}, "orange", {0.05, 0.05, 0.05}},
  };
  return pool;
}

class Planner {
 public:
  Planner(Script& script, std::mt19937_64& rng) : s_(script), scene_(script), rng_(rng) {}

  double Uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  size_t Pick(size_t n) { return static_cast<size_t>(rng_() % n); }

  // Footprint fits on the table, clears the others, and its image box
  // (drawers at full travel) keeps a margin to every other box.
  bool Fits(size_t self, const Vector2d& p, const std::vector<Vector2d>& positions) const {
    const ScriptObject& o = s_.objects[self];
    if (std::abs(p.x()) + 0.5 * o.size.x() > kHalfR - 0.02) return false;
    if (std::abs(p.y()) + 0.5 * o.size.y() > kHalfS - 0.03) return false;
    const Box mine = BoxOf(scene_, FootprintOf(o, p, 0.0));
    if (!mine.Within(s_.width, s_.height)) return false;
    for (size_t j = 0; j < s_.objects.size(); ++j) {
      if (j == self || positions[j].x() > 1.0) continue;  // not placed yet
      const ScriptObject& other = s_.objects[j];
      const double travel = other.states.empty() ? 0.0 : 1.0;
      const Footprint fo = FootprintOf(other, positions[j], travel);
      if (std::abs(p.x() - fo.center.x()) < 0.5 * (o.size.x() + fo.size.x()) + 0.03 &&
          std::abs(p.y() - fo.center.y()) < 0.5 * (o.size.y() + fo.size.y()) + 0.03) {
        return false;
      }
      if (BoxesOverlap(mine, BoxOf(scene_, fo), 6.0)) return false;
    }
    return true;
  }

  // The straight carry from a to b never covers another object enough to
  // read as one detection of two names.
  bool PathClear(size_t self, const Vector2d& a, const Vector2d& b,
                 const std::vector<Vector2d>& positions) const {
    const ScriptObject& o = s_.objects[self];
    for (int k = 1; k < kPathSamples; ++k) {
      const Vector2d p = Lerp(a, b, static_cast<double>(k) / kPathSamples);
      const Box mine = BoxOf(scene_, FootprintOf(o, p, 0.0));
      for (size_t j = 0; j < s_.objects.size(); ++j) {
        if (j == self || positions[j].x() > 1.0) continue;
        const ScriptObject& other = s_.objects[j];
        const double travel = other.states.empty() ? 0.0 : 1.0;
        if (Iou(mine, BoxOf(scene_, FootprintOf(other, positions[j], travel))) >= kMaxPathIou) {
          return false;
        }
      }
    }
    return true;
  }

  bool ImageShiftOk(size_t i, const Vector2d& a, const Vector2d& b) const {
    const ScriptObject& o = s_.objects[i];
    const Vector2d d = BoxOf(scene_, FootprintOf(o, b, 0.0)).Center() -
                       BoxOf(scene_, FootprintOf(o, a, 0.0)).Center();
    return d.norm() >= 0.1 * s_.width;
  }

  std::optional<ScriptTask> PickPlace(const std::vector<Vector2d>& positions) {
    std::vector<size_t> movable;
    for (size_t i = 0; i < s_.objects.size(); ++i) {
      if (s_.objects[i].movable) movable.push_back(i);
    }
    if (movable.size() < 2) return std::nullopt;
    const size_t x = movable[Pick(movable.size())];
    size_t y = movable[Pick(movable.size())];
    if (y == x) return std::nullopt;
    const std::string side = kSides[Pick(kSides.size())];
    const Vector2d axis = SideAxis(side);
    const ScriptObject& ox = s_.objects[x];
    const Vector2d ly = ExpectedLocal(scene_, s_.objects[y], positions[y]);
    const double offset = Uniform(0.11, 0.14);
    const Vector2d want = ly + offset * axis;
    Vector2d p = want;
    for (int it = 0; it < 8; ++it) p += want - ExpectedLocal(scene_, ox, p);
    const Vector2d got = ExpectedLocal(scene_, ox, p) - ly;
    const Vector2d perp(-axis.y(), axis.x());
    if (std::abs(got.dot(perp)) > 0.01 || got.dot(axis) < 0.09) return std::nullopt;
    // The relation must be new.
    const Vector2d before = ExpectedLocal(scene_, ox, positions[x]) - ly;
    if (before.norm() <= 0.37 && before.dot(axis) > 0.03) return std::nullopt;
    if (!Fits(x, p, positions) || !ImageShiftOk(x, positions[x], p) ||
        !PathClear(x, positions[x], p, positions)) {
      return std::nullopt;
    }
    ScriptTask t;
    t.kind = TaskKind::kPickPlace;
    t.object = ox.name;
    t.reference = s_.objects[y].name;
    t.side = side;
    t.destination = p;
    return t;
  }

  std::optional<ScriptTask> MoveCell(const std::vector<Vector2d>& positions) {
    std::vector<size_t> movable;
    for (size_t i = 0; i < s_.objects.size(); ++i) {
      if (s_.objects[i].movable) movable.push_back(i);
    }
    if (movable.empty()) return std::nullopt;
    const size_t x = movable[Pick(movable.size())];
    const ScriptObject& ox = s_.objects[x];
    const size_t cell = Pick(9);
    const Vector2d g((cell % 3 + 0.5) / 3.0, (cell / 3 + 0.5) / 3.0);
    const Vector2d want = TableFromGrid(g);
    Vector2d p = want;
    for (int it = 0; it < 8; ++it) p += want - BottomCenterOnTable(scene_, ox, p);
    const std::string label = GridCellLabels()[cell];
    const Vector2d start_g = GridPoint(BottomCenterOnTable(scene_, ox, positions[x]));
    // Start well outside the destination cell.
    const double lo_x = (cell % 3) / 3.0, lo_y = (cell / 3) / 3.0;
    const double dx = std::max({lo_x - start_g.x(), 0.0, start_g.x() - (lo_x + 1.0 / 3.0)});
    const double dy = std::max({lo_y - start_g.y(), 0.0, start_g.y() - (lo_y + 1.0 / 3.0)});
    if (std::hypot(dx, dy) < 0.05) return std::nullopt;
    if (GridCell(GridPoint(BottomCenterOnTable(scene_, ox, p))) != label) return std::nullopt;
    if (!Fits(x, p, positions) || !ImageShiftOk(x, positions[x], p) ||
        !PathClear(x, positions[x], p, positions)) {
      return std::nullopt;
    }
    ScriptTask t;
    t.kind = TaskKind::kMoveCell;
    t.object = ox.name;
    t.cell = label;
    t.destination = p;
    return t;
  }

 private:
  Script& s_;
  Scene scene_;
  std::mt19937_64& rng_;
};

}  // namespace

Script RandomScript(uint64_t seed, const RandomScriptOptions& options) {
  if (options.num_objects < 2) throw ValidationError("num_objects", "must be at least 2");
  if (options.num_objects > static_cast<int>(ObjectPool().size())) {
    throw ValidationError("num_objects", "at most " + std::to_string(ObjectPool().size()));
  }
  if (options.manipulation_frames < kMinManipulationFrames) {
    throw ValidationError("manipulation_frames", "too short");
  }
  std::mt19937_64 rng(seed);
  Script s;
  s.episode_id = "synth_" + std::to_string(seed);
  s.seed = seed;
  s.noise = options.noise;
  s.surface.synonyms = {"desk"};

  std::vector<size_t> idx(ObjectPool().size());
  for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::shuffle(idx.begin(), idx.end(), rng);
  if (options.with_drawer) {
    ScriptObject d;
    d.name = "drawer";
    d.synonyms = {"cabinet"};
    d.color = "brown";
    d.movable = false;
    d.container = true;
    d.states = {"closed", "open"};
    d.initial_state = "closed";
    d.position = {0.0, -0.24};
    d.size = {0.12, 0.06, 0.08};
    s.objects.push_back(d);
  }
  for (int k = 0; k < options.num_objects; ++k) {
    const Pool& p = ObjectPool()[idx[k]];
    ScriptObject o;
    o.name = p.name;
    o.synonyms = p.synonyms;
    o.color = p.color;
    o.size = p.size;
    s.objects.push_back(o);
  }

  Planner planner(s, rng);
  std::vector<Vector2d> positions;
  for (const ScriptObject& o : s.objects) {
    positions.push_back(o.movable ? Vector2d(10.0, 10.0) : o.position);
  }
  for (size_t i = 0; i < s.objects.size(); ++i) {
    if (!s.objects[i].movable) continue;
    bool placed = false;
    for (int attempt = 0; attempt < 2000 && !placed; ++attempt) {
      const Vector2d p(planner.Uniform(-0.17, 0.17), planner.Uniform(-0.2, 0.26));
      if (planner.Fits(i, p, positions)) {
        positions[i] = p;
        placed = true;
      }
    }
    if (!placed) throw Error("synth: no room for " + s.objects[i].name);
    s.objects[i].position = positions[i];
  }
  std::string drawer_state = "closed";
  int64_t cursor = options.lead_frames;
  for (int k = 0; k < options.num_tasks; ++k) {
    std::optional<ScriptTask> task;
    // The kind is rolled once; a crowded table falls back to the other
    // placement kind, then to the drawer.
    const double roll = planner.Uniform(0.0, 1.0);
    std::vector<int> order;
    if (options.with_drawer && roll < 0.25) order = {0};
    else if (roll < 0.65) order = {1, 2, 0};
    else order = {2, 1, 0};
    for (int kind : order) {
      if (kind == 0 && !options.with_drawer) continue;
      for (int attempt = 0; attempt < 400 && !task; ++attempt) {
        if (kind == 0) {
          ScriptTask t;
          t.kind = drawer_state == "closed" ? TaskKind::kOpen : TaskKind::kClose;
          t.object = "drawer";
          task = t;
        } else if (kind == 1) {
          task = planner.PickPlace(positions);
        } else {
          task = planner.MoveCell(positions);
        }
      }
      if (task) break;
    }
    if (!task) throw Error("synth: could not plan task " + std::to_string(k));
    task->start = cursor;
    task->end = cursor + kApproachFrames - 1 + options.manipulation_frames;
    cursor = task->end + 1 + options.gap_frames;
    if (task->kind == TaskKind::kOpen) drawer_state = "open";
    if (task->kind == TaskKind::kClose) drawer_state = "closed";
    if (task->destination) positions[IndexOf(s, task->object)] = *task->destination;
    s.tasks.push_back(*task);
  }
  s.num_frames = (s.tasks.empty() ? cursor : s.tasks.back().end + 1) + options.tail_frames;
  ValidateScript(s);
  return s;
}

// ---------------------------------------------------------------------------

std::string ScriptedMockClient::Complete(const ChatRequest& request) {
  std::string prompt;
  for (const ChatMessage& m : request.messages) {
    if (m.role == "user") prompt = m.content;
  }
  if (prompt.find(kPropertyPromptMarker) != std::string::npos) return AnswerPropertyPrompt(prompt);
  if (prompt.find(kTaskListPromptMarker) != std::string::npos) {
    std::vector<std::string> tasks;
    for (const ScriptTask& t : script_.tasks) {
      const std::string text = TaskText(t, script_);
      if (std::find(tasks.begin(), tasks.end(), text) == tasks.end()) tasks.push_back(text);
    }
    return Join(tasks, ", ");
  }
  if (prompt.find(kGranularityPromptMarker) != std::string::npos) {
    return AnswerGranularityPrompt(prompt);
  }
  if (prompt.find(kMultipleChoicePromptMarker) != std::string::npos) {
    return AnswerMultipleChoice(prompt);
  }
  if (prompt.find(kObjectPromptMarker) != std::string::npos) return AnswerObjectPrompt(prompt);
  return "***I cannot help with this request.***\n{\"tasks\": \"\", \"confidence\": \"\"}";
}

std::string ScriptedMockClient::AnswerObjectPrompt(const std::string& prompt) const {
  const std::vector<std::string> lines = ExtractObservationLines(prompt);
  if (lines.empty()) {
    return "***There are no observations to reason about.***\n"
           "{\"tasks\": \"\", \"confidence\": \"\"}";
  }
  // Outcome lines (movement, cell, state) between two gripper lines describe
  // one event; relation lines may sit among them. The answer is every task
  // explained by the latest event with evidence, latest line first: one
  // outcome can satisfy several descriptions.
  std::vector<const ScriptTask*> found, block;
  auto close_block = [&] {
    if (!block.empty()) found = block;
    block.clear();
  };
  for (const std::string& line : lines) {
    const auto parsed = ParseObservationText(line);
    const bool outcome = parsed && (parsed->kind == ObservationKind::kMovement ||
                                    parsed->kind == ObservationKind::kSurfacePosition ||
                                    parsed->kind == ObservationKind::kStateChange);
    if (!outcome) {
      const bool gripper = parsed && (parsed->kind == ObservationKind::kGripperNear ||
                                      parsed->kind == ObservationKind::kGripperClose);
      if (gripper) close_block();
      continue;
    }
    for (const ScriptTask& t : script_.tasks) {
      if (EvidenceMatches(t, script_, line)) block.insert(block.begin(), &t);
    }
  }
  close_block();
  LabelResponse r;
  if (!found.empty()) {
    for (auto it = found.begin(); it != found.end(); ++it) {
      const std::string text = TaskText(**it, script_);
      if (std::find(r.tasks.begin(), r.tasks.end(), text) != r.tasks.end()) continue;
      r.tasks.push_back(text);
      r.confidences.push_back(9.0);
    }
    r.tasks.push_back("pick up the " + ToLower(found.front()->object));
    r.confidences.push_back(2.0);
    return RenderLabelResponse(r, "The observations match a scripted task.");
  }
  std::string obj = "object";
  for (const std::string& line : lines) {
    if (auto p = ParseObservationText(line); p && p->kind != ObservationKind::kGripperNear) {
      obj = p->object;
      break;
    }
  }
  r.tasks = {"push the " + obj};
  r.confidences = {7.0};
  return RenderLabelResponse(r, "No scripted task explains the observations.");
}

std::string ScriptedMockClient::AnswerPropertyPrompt(const std::string& prompt) const {
  const size_t at = prompt.rfind("Objects: ");
  std::vector<std::string> names;
  if (at != std::string::npos) {
    for (const std::string& n : Split(prompt.substr(at + 9), ',')) {
      if (!Trim(n).empty()) names.push_back(Trim(n));
    }
  }
  std::vector<ObjectProperties> props;
  for (const std::string& name : names) {
    ObjectProperties p{false, false, {}, false};
    auto matches = [&](const ScriptObject& o) {
      for (const std::string& n : LowerNames(o)) {
        if (n == NormalizeText(name)) return true;
      }
      return false;
    };
    if (matches(script_.surface)) {
      p = {false, false, {}, true};
    }
    for (const ScriptObject& o : script_.objects) {
      if (matches(o)) p = {o.movable, o.container, o.states, true};
    }
    props.push_back(p);
  }
  return "***Properties follow from common sense.***\n" + RenderPropertyResponse(names, props);
}

std::string ScriptedMockClient::AnswerGranularityPrompt(const std::string& prompt) const {
  std::vector<std::string> tasks;
  for (const std::string& line : Split(prompt, '\n')) {
    if (!StartsWith(line, "Segment ")) continue;
    const size_t colon = line.find(": ");
    if (colon != std::string::npos) tasks.push_back(line.substr(colon + 2));
  }
  LabelResponse r{{Join(tasks, ", then ")}, {8.0}};
  if (tasks.empty()) r = LabelResponse{};
  return RenderLabelResponse(r, "The segments form one longer activity.");
}

std::string ScriptedMockClient::AnswerMultipleChoice(const std::string& prompt) const {
  std::vector<std::string> choices;
  for (const std::string& line : Split(prompt, '\n')) {
    if (StartsWith(line, "- ")) choices.push_back(line.substr(2));
  }
  const std::vector<std::string> lines = ExtractObservationLines(prompt);
  std::string pick = choices.empty() ? std::string() : choices.front();
  for (const std::string& line : lines) {
    for (const ScriptTask& t : script_.tasks) {
      if (!EvidenceMatches(t, script_, line)) continue;
      const std::string text = TaskText(t, script_);
      for (const std::string& c : choices) {
        if (NormalizeText(c) == NormalizeText(text)) pick = c;
      }
    }
  }
  return RenderLabelResponse({{pick}, {9.0}}, "Picked the best matching choice.");
}

}  // namespace playseg
