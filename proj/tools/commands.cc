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

#include "commands.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <map>
#include <ostream>
#include <thread>

#include <nlohmann/json.hpp>

#include "playseg/artifacts.h"
#include "playseg/config.h"
#include "playseg/error.h"
#include "playseg/evaluator.h"
#include "playseg/hashing.h"
#include "playseg/pipeline.h"
#include "playseg/stream.h"
#include "playseg/text.h"

#ifndef PLAYSEG_VERSION
#define PLAYSEG_VERSION "0.0.0"
#endif

namespace playseg::cli {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

// Loads the config, or reports the offending key and returns nullopt.
std::optional<Config> ResolveConfig(const ConfigSource& source, std::ostream& err) {
  try {
    return LoadConfig(source.file, source.overrides);
  } catch (const Error& e) {
    err << "config error: " << e.what() << "\n";
  }
  return std::nullopt;
}

std::string JoinIds(const std::vector<std::string>& ids) { return ids.empty() ? "-" : Join(ids, ", "); }

// Reports ids present on only one side. True when both sides agree.
bool SameEpisodes(const std::map<std::string, fs::path>& pred, const std::map<std::string, fs::path>& gt,
                  std::ostream& err) {
  std::vector<std::string> only_pred, only_gt;
  for (const auto& [id, path] : pred) {
    if (!gt.count(id)) only_pred.push_back(id);
  }
  for (const auto& [id, path] : gt) {
    if (!pred.count(id)) only_gt.push_back(id);
  }
  if (only_pred.empty() && only_gt.empty()) return true;
  err << "episode ids differ; only in predictions: " << JoinIds(only_pred)
      << "; only in ground truth: " << JoinIds(only_gt) << "\n";
  return false;
}

void WriteReport(const std::string& text, const std::optional<fs::path>& path, std::ostream& out) {
  out << text;
  if (path) WriteFile(*path, text);
}

struct EpisodeOutcome {
  std::string episode_id;
  std::string error;
  // Artifact suffix -> contents.
  std::vector<std::pair<std::string, std::string>> files;
  size_t keystates = 0;
  size_t segments = 0;
  size_t skipped = 0;
  std::map<std::string, double> timings_ms;
  double total_ms = 0.0;
};

EpisodeOutcome LabelOne(const std::string& id, const fs::path& path, const Config& config) {
  EpisodeOutcome o;
  o.episode_id = id;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    const Episode ep = LoadEpisode(path);
    if (ep.episode_id != id) {
      throw ValidationError("episode_id", "file name says " + id + " but the header says " + ep.episode_id);
    }
    std::optional<Script> script;
    if (config.client.mode == "mock") {
      const fs::path script_path = path.parent_path() / (id + kScriptSuffix);
      if (!fs::exists(script_path)) throw IoError(script_path.string(), "mock mode needs the episode script");
      script = LoadScript(script_path);
    }
    auto client = MakeClient(config.client, script);
    const PipelineResult r = RunPipeline(ep, config, *client);
    o.files.emplace_back(kRegistrySuffix, SerializeRegistry(id, r.registry));
    o.files.emplace_back(kObservationsSuffix, SerializeObservations(id, r.observations));
    o.files.emplace_back(kKeystatesSuffix, SerializeKeystates(KeystateFile{id, r.weights, config.keystates.theta,
                                                                          config.keystates.window, r.keystates}));
    o.files.emplace_back(kLabelsSuffix, SerializeLabels(LabelFile{id, r.labels}));
    o.keystates = r.keystates.size();
    o.segments = r.labels.segments.size();
    o.skipped = r.labels.skipped.size();
    o.timings_ms = r.timings_ms;
  } catch (const std::exception& e) {
    o.files.clear();
    o.error = e.what();
  }
  o.total_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return o;
}

}  // namespace

int RunLabel(const LabelArgs& args, std::ostream& out, std::ostream& err) {
  const std::optional<Config> config = ResolveConfig(args.config, err);
  if (!config) return kExitConfig;

  std::map<std::string, fs::path> episodes;
  try {
    episodes = ListArtifacts(args.episode_dir, kEpisodeSuffix);
    fs::create_directories(args.out_dir);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }

  std::vector<std::pair<std::string, fs::path>> jobs(episodes.begin(), episodes.end());
  std::vector<EpisodeOutcome> outcomes(jobs.size());
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t i = next++; i < jobs.size(); i = next++) {
      outcomes[i] = LabelOne(jobs[i].first, jobs[i].second, *config);
    }
  };
  const size_t n_workers = std::min<size_t>(static_cast<size_t>(config->run.workers), jobs.size());
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }

  Json manifest;
  manifest["tool"] = "playseg";
  manifest["version"] = PLAYSEG_VERSION;
  manifest["command"] = "label";
  manifest["config_hash"] = ConfigHash(*config);
  manifest["config"] = Json::parse(ConfigToJson(*config));
  manifest["client_model"] = config->client.mode == "mock" ? "scripted-mock" : config->client.model;
  manifest["episodes"] = Json::array();
  Json timing;
  timing["episodes"] = Json::array();
  size_t failed = 0;
  for (const EpisodeOutcome& o : outcomes) {
    Json e;
    e["episode_id"] = o.episode_id;
    if (o.error.empty()) {
      e["status"] = "ok";
      e["keystates"] = o.keystates;
      e["segments"] = o.segments;
      e["skipped"] = o.skipped;
      Json files = Json::object();
      try {
        for (const auto& [suffix, text] : o.files) {
          const std::string name = o.episode_id + suffix;
          WriteFile(args.out_dir / name, text);
          files[name] = Sha256Hex(text);
        }
      } catch (const Error& ex) {
        e["status"] = "error";
        e["error"] = ex.what();
      }
      e["outputs"] = files;
    } else {
      e["status"] = "error";
      e["error"] = o.error;
    }
    if (e["status"] == "error") {
      ++failed;
      err << "episode " << o.episode_id << ": " << e["error"].get<std::string>() << "\n";
    }
    manifest["episodes"].push_back(e);
    Json t;
    t["episode_id"] = o.episode_id;
    t["total_ms"] = o.total_ms;
    t["stages_ms"] = o.timings_ms;
    timing["episodes"].push_back(t);
  }
  manifest["failed"] = failed;
  try {
    WriteFile(args.out_dir / kManifestFile, manifest.dump(2) + "\n");
    WriteFile(args.out_dir / kTimingFile, timing.dump(2) + "\n");
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  out << "labeled " << outcomes.size() - failed << " of " << outcomes.size() << " episodes into "
      << args.out_dir.string() << "\n";
  return failed == 0 ? kExitOk : kExitFailure;
}

int RunEvalKeystates(const EvalKeystatesArgs& args, std::ostream& out, std::ostream& err) {
  const std::optional<Config> config = ResolveConfig(args.config, err);
  if (!config) return kExitConfig;
  try {
    const auto pred = ListArtifacts(args.pred_dir, kKeystatesSuffix);
    const auto gt = ListArtifacts(args.gt_dir, kTruthSuffix);
    if (!SameEpisodes(pred, gt, err)) return kExitFailure;
    std::vector<EpisodeKeystates> episodes;
    std::vector<std::pair<int64_t, int64_t>> spans;
    for (const auto& [id, path] : pred) {
      const KeystateFile kf = ParseKeystates(ReadFile(path));
      const GroundTruth truth = ParseTruth(ReadFile(gt.at(id)));
      EpisodeKeystates e;
      e.episode_id = id;
      for (const Keystate& k : kf.keystates) e.pred.push_back({k.frame_index, k.score});
      e.gt = truth.keystates;
      for (const TaskLabel& t : truth.tasks) spans.emplace_back(t.start, t.end);
      episodes.push_back(std::move(e));
    }
    std::vector<int64_t> tolerances = config->eval.tolerances;
    if (config->eval.task_length_factor) {
      tolerances.push_back(EpsilonFromTaskLength(spans, *config->eval.task_length_factor));
    }
    WriteReport(RenderKeystateReport(SummarizeKeystates(episodes, tolerances)), args.report, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitOk;
}

int RunEvalGrounding(const EvalGroundingArgs& args, std::ostream& out, std::ostream& err) {
  const std::optional<Config> config = ResolveConfig(args.config, err);
  if (!config) return kExitConfig;
  try {
    const auto labels = ListArtifacts(args.labels_dir, kLabelsSuffix);
    const auto gt = ListArtifacts(args.gt_dir, kTruthSuffix);
    if (!SameEpisodes(labels, gt, err)) return kExitFailure;
    std::vector<EpisodeGrounding> episodes;
    for (const auto& [id, path] : labels) {
      const LabelFile lf = ParseLabels(ReadFile(path));
      const GroundTruth truth = ParseTruth(ReadFile(gt.at(id)));
      EpisodeGrounding e;
      e.episode_id = id;
      for (const LabeledSegment& s : lf.labels.segments) e.pred.push_back({s.end_frame, s.tasks});
      for (const TaskLabel& t : truth.tasks) e.gt.push_back({t.end, t.text});
      episodes.push_back(std::move(e));
    }
    const GroundingMode mode = GroundingModeFromName(config->eval.grounding_mode);
    const GroundingReport report = EvaluateGrounding(episodes, config->eval.grounding_epsilon, mode);
    WriteReport(RenderGroundingReport(report, config->eval.grounding_epsilon), args.report, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitOk;
}

int RunSynth(const SynthArgs& args, std::ostream& out, std::ostream& err) {
  std::vector<Script> scripts;
  try {
    if (args.script) {
      scripts.push_back(LoadScript(*args.script));
    } else {
      if (args.count < 1) throw ValidationError("count", "must be at least 1");
      for (int i = 0; i < args.count; ++i) scripts.push_back(RandomScript(args.seed + i, args.random));
    }
  } catch (const std::exception& e) {
    err << "script error: " << e.what() << "\n";
    return kExitFailure;
  }
  try {
    fs::create_directories(args.out_dir);
    for (const Script& s : scripts) {
      const SynthOutput gen = Generate(s);
      SaveEpisode(gen.episode, args.out_dir / (s.episode_id + kEpisodeSuffix));
      SaveScript(s, args.out_dir / (s.episode_id + kScriptSuffix));
      WriteFile(args.out_dir / (s.episode_id + kTruthSuffix), SerializeTruth(gen.truth));
      out << s.episode_id << ": " << gen.episode.frames.size() << " frames, " << s.tasks.size() << " tasks\n";
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitOk;
}

int RunInspect(const fs::path& path, std::ostream& out, std::ostream& err) {
  try {
    out << PrettyPrint(path);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitOk;
}

}  // namespace playseg::cli
