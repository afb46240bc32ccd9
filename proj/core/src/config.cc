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

#include "playseg/config.h"

#include <nlohmann/json.hpp>

#include "playseg/error.h"
#include "playseg/hashing.h"
#include "playseg/stream.h"
#include "playseg/text.h"

namespace playseg {

namespace {

using Json = nlohmann::ordered_json;

Json ToJsonTree(const Config& c) {
  Json j;
  j["registry"] = {{"query_frames", c.registry.query_frames},
                   {"iou_thresh", c.registry.iou_thresh},
                   {"min_objectness", c.registry.min_objectness}};
  j["fusion"] = {{"mad_cutoff", c.fusion.mad_cutoff},
                 {"eps_frac", c.fusion.eps_frac},
                 {"min_pts", c.fusion.min_pts},
                 {"min_component_frac", c.fusion.min_component_frac}};
  Json intr = nullptr;
  if (c.signals.intrinsics) {
    intr = {{"fx", c.signals.intrinsics->fx}, {"fy", c.signals.intrinsics->fy},
            {"cx", c.signals.intrinsics->cx}, {"cy", c.signals.intrinsics->cy}};
  }
  j["signals"] = {
      {"disp_thresh", c.signals.movement.disp_thresh},
      {"flow_thresh", c.signals.movement.flow_thresh},
      {"flow_min_frames", c.signals.movement.flow_min_frames},
      {"tau_rel", c.signals.relation.tau_rel},
      {"neighbor_radius", c.signals.relation.neighbor_radius},
      {"on_top_overlap", c.signals.relation.on_top_overlap},
      {"inside_scale", c.signals.relation.inside_scale},
      {"relation_persistence", c.signals.relation_persistence},
      {"state_window", c.signals.state.window},
      {"state_votes", c.signals.state.votes},
      {"occlusion_iou", c.signals.state.occlusion_iou},
      {"crop_padding", c.signals.state.crop_padding},
      {"near_frames", c.signals.gripper.near_frames},
      {"tau_scale", c.signals.gripper.tau_scale},
      {"tau_reference_size", c.signals.gripper.tau_reference_size},
      {"tau_min", c.signals.gripper.tau_min},
      {"tau_max", c.signals.gripper.tau_max},
      {"depth_scaling", c.signals.gripper.depth_scaling},
      {"surface_stride", c.signals.surface_cloud.stride},
      {"surface_outlier_k", c.signals.surface_cloud.outlier_k},
      {"surface_outlier_std", c.signals.surface_cloud.outlier_std_ratio},
      {"object_stride", c.signals.object_stride},
      {"intrinsics", intr}};
  j["observations"] = {{"synonym_diversity", c.observations.synonym_diversity},
                       {"seed", c.observations.seed}};
  Json enabled = Json::object();
  for (Heuristic h : kAllHeuristics) {
    enabled[std::string(HeuristicName(h))] = c.keystates.enabled.count(h) > 0;
  }
  Json weights = nullptr;
  if (!c.keystates.weights.empty()) {
    weights = Json::object();
    for (const auto& [h, w] : c.keystates.weights) weights[std::string(HeuristicName(h))] = w;
  }
  j["keystates"] = {{"heuristics", enabled},
                    {"weights", weights},
                    {"theta", c.keystates.theta},
                    {"window", c.keystates.window},
                    {"graded_movement", c.keystates.graded_movement}};
  j["labeler"] = {{"min_conf", c.labeler.options.min_conf},
                  {"keep_all", c.labeler.options.keep_all},
                  {"max_in_flight", c.labeler.max_in_flight}};
  j["eval"] = {{"tolerances", c.eval.tolerances},
               {"task_length_factor",
                c.eval.task_length_factor ? Json(*c.eval.task_length_factor) : Json(nullptr)},
               {"grounding_mode", c.eval.grounding_mode},
               {"grounding_epsilon", c.eval.grounding_epsilon}};
  j["client"] = {{"mode", c.client.mode},
                 {"endpoint", c.client.endpoint},
                 {"model", c.client.model},
                 {"timeout_ms", c.client.timeout_ms},
                 {"attempts", c.client.attempts},
                 {"backoff_ms", c.client.backoff_ms}};
  j["run"] = {{"workers", c.run.workers}};
  return j;
}

std::string TypeName(const Json& j) {
  if (j.is_boolean()) return "a boolean";
  if (j.is_number_integer() || j.is_number_unsigned()) return "an integer";
  if (j.is_number()) return "a number";
  if (j.is_string()) return "a string";
  if (j.is_array()) return "a list";
  if (j.is_object()) return "an object";
  return "null";
}

// Overlays `user` onto `base`, which holds every known key.
void Overlay(Json& base, const Json& user, const std::string& path) {
  if (!user.is_object()) throw ValidationError(path.empty() ? "config" : path, "must be an object");
  for (const auto& [key, value] : user.items()) {
    const std::string field = path.empty() ? key : path + "." + key;
    if (!base.contains(key)) throw ValidationError(field, "unknown key");
    Json& slot = base[key];
    if (slot.is_null()) {
      slot = value;  // optional sections, checked on extraction
    } else if (slot.is_object()) {
      Overlay(slot, value, field);
    } else {
      const bool ok = (slot.is_boolean() && value.is_boolean()) ||
                      ((slot.is_number_integer() || slot.is_number_unsigned()) &&
                       (value.is_number_integer() || value.is_number_unsigned())) ||
                      (slot.is_number_float() && value.is_number()) ||
                      (slot.is_string() && value.is_string()) ||
                      (slot.is_array() && value.is_array());
      if (!ok) throw ValidationError(field, "expected " + TypeName(slot) + ", got " + TypeName(value));
      slot = value;
    }
  }
}

template <typename T>
T Take(const Json& j, const std::string& section, const char* key) {
  try {
    return j.at(section).at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ValidationError(section + "." + key, "has the wrong type");
  }
}

Config FromJsonTree(const Json& j) {
  Config c;
  c.registry.query_frames = Take<int>(j, "registry", "query_frames");
  c.registry.iou_thresh = Take<double>(j, "registry", "iou_thresh");
  c.registry.min_objectness = Take<double>(j, "registry", "min_objectness");
  c.fusion.mad_cutoff = Take<double>(j, "fusion", "mad_cutoff");
  c.fusion.eps_frac = Take<double>(j, "fusion", "eps_frac");
  c.fusion.min_pts = Take<int>(j, "fusion", "min_pts");
  c.fusion.min_component_frac = Take<double>(j, "fusion", "min_component_frac");

  SignalOptions& s = c.signals;
  s.movement.disp_thresh = Take<double>(j, "signals", "disp_thresh");
  s.movement.flow_thresh = Take<double>(j, "signals", "flow_thresh");
  s.movement.flow_min_frames = Take<int>(j, "signals", "flow_min_frames");
  s.relation.tau_rel = Take<double>(j, "signals", "tau_rel");
  s.relation.neighbor_radius = Take<double>(j, "signals", "neighbor_radius");
  s.relation.on_top_overlap = Take<double>(j, "signals", "on_top_overlap");
  s.relation.inside_scale = Take<double>(j, "signals", "inside_scale");
  s.relation_persistence = Take<int>(j, "signals", "relation_persistence");
  s.state.window = Take<int>(j, "signals", "state_window");
  s.state.votes = Take<int>(j, "signals", "state_votes");
  s.state.occlusion_iou = Take<double>(j, "signals", "occlusion_iou");
  s.state.crop_padding = Take<double>(j, "signals", "crop_padding");
  s.gripper.near_frames = Take<int>(j, "signals", "near_frames");
  s.gripper.tau_scale = Take<double>(j, "signals", "tau_scale");
  s.gripper.tau_reference_size = Take<double>(j, "signals", "tau_reference_size");
  s.gripper.tau_min = Take<double>(j, "signals", "tau_min");
  s.gripper.tau_max = Take<double>(j, "signals", "tau_max");
  s.gripper.depth_scaling = Take<bool>(j, "signals", "depth_scaling");
  s.surface_cloud.stride = Take<uint32_t>(j, "signals", "surface_stride");
  s.surface_cloud.outlier_k = Take<int>(j, "signals", "surface_outlier_k");
  s.surface_cloud.outlier_std_ratio = Take<double>(j, "signals", "surface_outlier_std");
  s.object_stride = Take<uint32_t>(j, "signals", "object_stride");
  const Json& intr = j.at("signals").at("intrinsics");
  if (!intr.is_null()) {
    if (!intr.is_object()) throw ValidationError("signals.intrinsics", "expected an object or null");
    Intrinsics in;
    for (const auto& [key, value] : intr.items()) {
      if (!value.is_number()) throw ValidationError("signals.intrinsics." + key, "expected a number");
      if (key == "fx") in.fx = value.get<double>();
      else if (key == "fy") in.fy = value.get<double>();
      else if (key == "cx") in.cx = value.get<double>();
      else if (key == "cy") in.cy = value.get<double>();
      else throw ValidationError("signals.intrinsics." + key, "unknown key");
    }
    s.intrinsics = in;
  }

  c.observations.synonym_diversity = Take<bool>(j, "observations", "synonym_diversity");
  c.observations.seed = Take<uint64_t>(j, "observations", "seed");

  c.keystates.enabled.clear();
  for (const auto& [name, on] : j.at("keystates").at("heuristics").items()) {
    const auto h = HeuristicFromName(name);
    if (!h) throw ValidationError("keystates.heuristics." + name, "unknown key");
    if (!on.is_boolean()) throw ValidationError("keystates.heuristics." + name, "expected a boolean");
    if (on.get<bool>()) c.keystates.enabled.insert(*h);
  }
  const Json& weights = j.at("keystates").at("weights");
  if (!weights.is_null()) {
    if (!weights.is_object()) throw ValidationError("keystates.weights", "expected an object or null");
    for (const auto& [name, w] : weights.items()) {
      const auto h = HeuristicFromName(name);
      if (!h) throw ValidationError("keystates.weights." + name, "unknown key");
      if (!w.is_number()) throw ValidationError("keystates.weights." + name, "expected a number");
      c.keystates.weights[*h] = w.get<double>();
    }
  }
  c.keystates.theta = Take<double>(j, "keystates", "theta");
  c.keystates.window = Take<int>(j, "keystates", "window");
  c.keystates.graded_movement = Take<bool>(j, "keystates", "graded_movement");

  c.labeler.options.min_conf = Take<double>(j, "labeler", "min_conf");
  c.labeler.options.keep_all = Take<bool>(j, "labeler", "keep_all");
  c.labeler.max_in_flight = Take<int>(j, "labeler", "max_in_flight");

  c.eval.tolerances = Take<std::vector<int64_t>>(j, "eval", "tolerances");
  const Json& factor = j.at("eval").at("task_length_factor");
  if (!factor.is_null()) {
    if (!factor.is_number()) throw ValidationError("eval.task_length_factor", "expected a number or null");
    c.eval.task_length_factor = factor.get<double>();
  }
  c.eval.grounding_mode = Take<std::string>(j, "eval", "grounding_mode");
  c.eval.grounding_epsilon = Take<int64_t>(j, "eval", "grounding_epsilon");

  c.client.mode = Take<std::string>(j, "client", "mode");
  c.client.endpoint = Take<std::string>(j, "client", "endpoint");
  c.client.model = Take<std::string>(j, "client", "model");
  c.client.timeout_ms = Take<int64_t>(j, "client", "timeout_ms");
  c.client.attempts = Take<int>(j, "client", "attempts");
  c.client.backoff_ms = Take<int64_t>(j, "client", "backoff_ms");
  c.run.workers = Take<int>(j, "run", "workers");
  return c;
}

void Range(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw ValidationError(field, what);
}

}  // namespace

std::string ConfigToJson(const Config& config, int indent) {
  return ToJsonTree(config).dump(indent);
}

void ValidateConfig(const Config& c) {
  Range(c.registry.query_frames >= 1, "registry.query_frames", "must be at least 1");
  Range(c.registry.iou_thresh >= 0 && c.registry.iou_thresh <= 1, "registry.iou_thresh", "must lie in [0, 1]");
  Range(c.registry.min_objectness >= 0 && c.registry.min_objectness <= 1, "registry.min_objectness",
        "must lie in [0, 1]");
  Range(c.fusion.mad_cutoff > 0, "fusion.mad_cutoff", "must be positive");
  Range(c.fusion.eps_frac > 0, "fusion.eps_frac", "must be positive");
  Range(c.fusion.min_pts >= 1, "fusion.min_pts", "must be at least 1");
  Range(c.fusion.min_component_frac >= 0 && c.fusion.min_component_frac <= 1,
        "fusion.min_component_frac", "must lie in [0, 1]");
  const SignalOptions& s = c.signals;
  Range(s.movement.disp_thresh > 0, "signals.disp_thresh", "must be positive");
  Range(s.movement.flow_thresh > 0, "signals.flow_thresh", "must be positive");
  Range(s.movement.flow_min_frames >= 1, "signals.flow_min_frames", "must be at least 1");
  Range(s.relation.tau_rel >= 0, "signals.tau_rel", "must be non-negative");
  Range(s.relation.neighbor_radius > 0, "signals.neighbor_radius", "must be positive");
  Range(s.relation.on_top_overlap >= 0 && s.relation.on_top_overlap <= 1, "signals.on_top_overlap",
        "must lie in [0, 1]");
  Range(s.relation.inside_scale >= 1, "signals.inside_scale", "must be at least 1");
  Range(s.relation_persistence >= 1, "signals.relation_persistence", "must be at least 1");
  Range(s.state.window >= 1, "signals.state_window", "must be at least 1");
  Range(s.state.votes >= 1 && s.state.votes <= s.state.window, "signals.state_votes",
        "must lie in [1, state_window]");
  Range(s.state.occlusion_iou >= 0 && s.state.occlusion_iou <= 1, "signals.occlusion_iou",
        "must lie in [0, 1]");
  Range(s.state.crop_padding >= 0, "signals.crop_padding", "must be non-negative");
  Range(s.gripper.near_frames >= 1, "signals.near_frames", "must be at least 1");
  Range(s.gripper.tau_scale > 0, "signals.tau_scale", "must be positive");
  Range(s.gripper.tau_reference_size > 0, "signals.tau_reference_size", "must be positive");
  Range(s.gripper.tau_min > 0 && s.gripper.tau_min <= s.gripper.tau_max, "signals.tau_min",
        "must be positive and at most tau_max");
  Range(s.surface_cloud.stride >= 1, "signals.surface_stride", "must be at least 1");
  Range(s.surface_cloud.outlier_k >= 0, "signals.surface_outlier_k", "must be non-negative");
  Range(s.object_stride >= 1, "signals.object_stride", "must be at least 1");
  if (s.intrinsics) {
    Range(s.intrinsics->fx > 0 && s.intrinsics->fy > 0, "signals.intrinsics", "focal lengths must be positive");
  }
  Range(!c.keystates.enabled.empty(), "keystates.heuristics", "at least one heuristic must be enabled");
  if (!c.keystates.weights.empty()) {
    for (const auto& [h, w] : c.keystates.weights) {
      Range(c.keystates.enabled.count(h) > 0, "keystates.weights." + std::string(HeuristicName(h)),
            "weight for a disabled heuristic");
    }
    ValidateWeights(c.keystates.weights);
  }
  Range(c.keystates.theta >= 0 && c.keystates.theta <= 1, "keystates.theta", "must lie in [0, 1]");
  Range(c.keystates.window >= 0, "keystates.window", "must be non-negative");
  Range(c.labeler.options.min_conf >= 0 && c.labeler.options.min_conf <= 10, "labeler.min_conf",
        "must lie in [0, 10]");
  Range(c.labeler.max_in_flight >= 1, "labeler.max_in_flight", "must be at least 1");
  Range(!c.eval.tolerances.empty(), "eval.tolerances", "must not be empty");
  for (int64_t e : c.eval.tolerances) Range(e >= 0, "eval.tolerances", "must be non-negative");
  if (c.eval.task_length_factor) {
    Range(*c.eval.task_length_factor > 0, "eval.task_length_factor", "must be positive");
  }
  Range(c.eval.grounding_mode == "amb" || c.eval.grounding_mode == "single", "eval.grounding_mode",
        "expected amb or single");
  Range(c.eval.grounding_epsilon >= 0, "eval.grounding_epsilon", "must be non-negative");
  Range(c.client.mode == "mock" || c.client.mode == "http", "client.mode", "expected mock or http");
  Range(c.client.mode != "http" || !c.client.endpoint.empty(), "client.endpoint",
        "required in http mode");
  Range(c.client.timeout_ms > 0, "client.timeout_ms", "must be positive");
  Range(c.client.attempts >= 1, "client.attempts", "must be at least 1");
  Range(c.client.backoff_ms >= 0, "client.backoff_ms", "must be non-negative");
  Range(c.run.workers >= 1, "run.workers", "must be at least 1");
}

Config ConfigFromJson(const std::string& json_text) {
  Json user;
  try {
    user = Json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("config", std::string("malformed JSON: ") + e.what());
  }
  Json base = ToJsonTree(Config{});
  Overlay(base, user, "");
  Config c = FromJsonTree(base);
  ValidateConfig(c);
  return c;
}

Config LoadConfig(const std::optional<std::filesystem::path>& path,
                  const std::vector<std::string>& overrides) {
  Json user = Json::object();
  if (path) {
    try {
      user = Json::parse(ReadFile(*path));
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError("config", std::string("malformed JSON: ") + e.what());
    }
    if (!user.is_object()) throw ValidationError("config", "must be an object");
  }
  for (const std::string& assignment : overrides) {
    const size_t eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ValidationError(assignment, "override must look like section.key=value");
    }
    const std::vector<std::string> keys = Split(assignment.substr(0, eq), '.');
    const std::string text = assignment.substr(eq + 1);
    Json value;
    try {
      value = Json::parse(text);
    } catch (const nlohmann::json::exception&) {
      value = text;
    }
    Json* slot = &user;
    for (size_t i = 0; i + 1 < keys.size(); ++i) {
      if (!(*slot)[keys[i]].is_object()) (*slot)[keys[i]] = Json::object();
      slot = &(*slot)[keys[i]];
    }
    (*slot)[keys.back()] = value;
  }
  return ConfigFromJson(user.dump());
}

std::string ConfigHash(const Config& config) { return Sha256Hex(ToJsonTree(config).dump()); }

HttpClientOptions ToHttpOptions(const ClientConfig& client) {
  HttpClientOptions o;
  o.endpoint = client.endpoint;
  o.model = client.model;
  o.timeout = std::chrono::milliseconds(client.timeout_ms);
  o.retry.attempts = client.attempts;
  o.retry.initial_backoff = std::chrono::milliseconds(client.backoff_ms);
  return o;
}

}  // namespace playseg
