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

#ifndef PLAYSEG_ARTIFACTS_H_
#define PLAYSEG_ARTIFACTS_H_

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "playseg/keystates.h"
#include "playseg/labeler.h"
#include "playseg/observations.h"
#include "playseg/registry.h"
#include "playseg/synth.h"

namespace playseg {

// Every artifact is a line-record file: one JSON object per line, each with
// a "record" key. The first line is {"record": "meta", "artifact": kind,
// "episode_id": id, ...}. Parsers throw ParseError with the line number.

inline constexpr char kRegistrySuffix[] = ".registry.jsonl";
inline constexpr char kObservationsSuffix[] = ".observations.jsonl";
inline constexpr char kKeystatesSuffix[] = ".keystates.jsonl";
inline constexpr char kLabelsSuffix[] = ".labels.jsonl";
inline constexpr char kTruthSuffix[] = ".truth.jsonl";
inline constexpr char kEpisodeSuffix[] = ".episode.jsonl";
inline constexpr char kScriptSuffix[] = ".script.jsonl";

std::string SerializeRegistry(const std::string& episode_id, const ObjectRegistry& registry);
ObjectRegistry ParseRegistry(const std::string& text, std::string* episode_id = nullptr);

std::string SerializeObservations(const std::string& episode_id, const ObservationLog& log);
ObservationLog ParseObservations(const std::string& text, std::string* episode_id = nullptr);

struct KeystateFile {
  std::string episode_id;
  // Weights in effect after renormalization over available heuristics.
  HeuristicWeights weights;
  double theta = 0.25;
  int window = 8;
  std::vector<Keystate> keystates;
};

std::string SerializeKeystates(const KeystateFile& file);
KeystateFile ParseKeystates(const std::string& text);

struct LabelFile {
  std::string episode_id;
  EpisodeLabels labels;
};

// Segment records hold tasks ';'-joined and confidences ','-joined in the
// shortest round-trip decimal form.
std::string SerializeLabels(const LabelFile& file);
LabelFile ParseLabels(const std::string& text);

std::string SerializeTruth(const GroundTruth& truth);
GroundTruth ParseTruth(const std::string& text);

// Episode id encoded in a file name ending in `suffix`; empty otherwise.
std::string EpisodeIdFromPath(const std::filesystem::path& path, std::string_view suffix);

// Files in `dir` ending in `suffix`, sorted by episode id. Throws IoError
// when `dir` is not a directory.
std::map<std::string, std::filesystem::path> ListArtifacts(const std::filesystem::path& dir,
                                                           std::string_view suffix);

// Readable rendering of any artifact, script or episode file, picked by
// file name suffix. Throws ParseError for an unknown suffix.
std::string PrettyPrint(const std::filesystem::path& path);

}  // namespace playseg

#endif  // PLAYSEG_ARTIFACTS_H_
