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

#include "playseg/labeler.h"

#include <algorithm>
#include <charconv>
#include <future>

#include <nlohmann/json.hpp>

#include "playseg/error.h"
#include "playseg/text.h"

namespace playseg {

namespace {

constexpr char kObjectPromptHead[] =
    "You will be provided with observations of a robot interaction with an "
    "environment, delimited by triple quotes.\n\n"
    "Determine the task the robot could have solved. The robot can only solve "
    "one task. If the observations indicate that the robot interacted with "
    "multiple objects, focus on the most frequent and precise observations.\n\n"
    "Follow these guidelines:\n\n"
    "Step 1: Answer what objects appear in the observation. List all objects. "
    "Then, determine the object for which the observations align the best.\n\n"
    "Step 2: Determine the object movement and the resulting object relations. "
    "Think about where the object and its relational objects are located in the "
    "scene on a global scale. Think step by step and list the locations and "
    "relations of all objects. Explain the object movements.\n\n"
    "Step 3: Determine what tasks result in the object relations from Step 2.\n\n"
    "Step 4: Output tasks that that accomplish the observations as short "
    "instructions. Focus on simple, single-step tasks that only require "
    "interaction with the determined object from Step 1. Focus on tasks that "
    "include changing the object relation and moving the object.\n\n"
    "Example tasks: \"Place the pot to the left of the fruit\"; Slide the "
    "dishrag to the bottom of the table next to the towel\"; Pick up the spoon "
    "and place it  at the bottom left of the table;\"Put the pot to the right "
    "of the fruit\"; \"Move the pot forward and to the left\"; \"Turn on "
    "stove\"; \"Open the microwave\"; \"Relocate the knife inside the sink\".\n"
    "Follow the steps above. Explain your reasoning. Output the reasoning "
    "delimited by ***.\n\n"
    "After, produce your output as JSON. The format should be:\n"
    "```{\n"
    "\"tasks\": \"The determined tasks, delimited by semicolons. Output 4 "
    "different,diverse task instructions. The instructions should cover all "
    "observations and each include different observations. Example: Place the "
    "pot to the left of the fruit; Move the pot backward and to the right; "
    "Relocate the pot at the left of the table to the center of the table; "
    "Lift up the pot and place it next to the spoon;\",\n"
    "\"confidence\": \"A confidence score for each task between 0 and 10, "
    "delimited by commas. Be pessimistic.\"\n"
    "}```\n\n";

constexpr char kObservationsOpen[] = "Observations: ```";
constexpr char kFence[] = "```";

constexpr char kTaskListPrompt[] =
    "You will be provided with a list of objects observed by a robot. Based on "
    "the objects, give possible instructions to the robot. Infer the type of "
    "environment from the provided objects.\n"
    "Follow these guidelines:\n\n"
    "- Keep the instructions simple. Focus on tasks that only require a single "
    "step.\n\n"
    "- Include tasks like placing an object inside another object or moving "
    "the object. Only for movable objects.\n\n"
    "- Dont assume the presence of any objects not listed. \n\n"
    "Output at least 20 possible instructions delimited by comma.\n\n"
    "Here are a few examples: \"Place the tin can to the left of the pot.\", "
    "\"Move the dishrag to the bottom of the table next to the towel\",\"Put "
    "the pot to the right of the fruit\",\"Turn on stove\", \"Open the "
    "microwave\"\n\n"
    "The following objects are in the environment: ";

constexpr char kJsonContract[] =
    "After, produce your output as JSON. The format should be:\n"
    "```{\n"
    "\"tasks\": \"The determined tasks, delimited by semicolons.\",\n"
    "\"confidence\": \"A confidence score for each task between 0 and 10, "
    "delimited by commas. Be pessimistic.\"\n"
    "}```\n\n";

// JSON object that follows the reasoning block.
nlohmann::json ExtractJson(const std::string& raw) {
  const size_t marker = raw.rfind("***");
  const size_t from = marker == std::string::npos ? 0 : marker + 3;
  const size_t open = raw.find('{', from);
  const size_t close = raw.rfind('}');
  if (open == std::string::npos || close == std::string::npos || close < open) {
    throw ResponseError("no JSON object in model reply", raw);
  }
  try {
    return nlohmann::json::parse(raw.substr(open, close - open + 1));
  } catch (const nlohmann::json::exception& e) {
    throw ResponseError(std::string("malformed JSON in model reply: ") + e.what(), raw);
  }
}

std::vector<std::string> SplitNonEmpty(const std::string& s, char sep) {
  std::vector<std::string> out;
  for (const std::string& part : Split(s, sep)) {
    std::string t = Trim(part);
    if (!t.empty()) out.push_back(std::move(t));
  }
  return out;
}

std::string FieldAsString(const nlohmann::json& j, const char* key,
                          const std::string& raw) {
  auto it = j.find(key);
  if (it == j.end()) throw ResponseError(std::string("reply lacks \"") + key + "\"", raw);
  if (it->is_string()) return it->get<std::string>();
  if (it->is_array()) {
    std::vector<std::string> parts;
    for (const auto& v : *it) parts.push_back(v.is_string() ? v.get<std::string>() : v.dump());
    return Join(parts, key == std::string("tasks") ? ";" : ",");
  }
  if (it->is_number()) return it->dump();
  throw ResponseError(std::string("reply field \"") + key + "\" has the wrong type", raw);
}

std::string StripQuotes(std::string s) {
  s = Trim(s);
  while (!s.empty() && (s.front() == '"' || s.front() == '\'')) s.erase(s.begin());
  while (!s.empty() && (s.back() == '"' || s.back() == '\'')) s.pop_back();
  return Trim(s);
}

}  // namespace

std::vector<std::string> SegmentObservationLines(const ObservationLog& log,
                                                 int64_t start, int64_t end,
                                                 int focus) {
  std::vector<std::string> lines;
  for (const Observation& o : log) {
    if (o.frame_index < start || o.frame_index > end) continue;
    if (o.object_id == focus || o.kind == ObservationKind::kGripperNear) {
      lines.push_back(o.text);
    }
  }
  return lines;
}

std::string RenderObjectPrompt(const std::vector<std::string>& lines) {
  return std::string(kObjectPromptHead) + kObservationsOpen + Join(lines, "\n") + kFence;
}

std::string BuildObjectPrompt(const ObservationLog& log, int64_t start,
                              int64_t end, int focus) {
  const bool any = std::any_of(log.begin(), log.end(), [&](const Observation& o) {
    return o.object_id == focus && o.frame_index >= start && o.frame_index <= end;
  });
  if (!any) throw LabelError("nothing to label");
  return RenderObjectPrompt(SegmentObservationLines(log, start, end, focus));
}

std::string BuildTaskListPrompt(const ObjectRegistry& registry) {
  std::vector<std::string> names;
  for (const ObjectEntry& e : registry.entries) names.push_back(e.canonical_name);
  return kTaskListPrompt + Join(names, ", ");
}

std::string BuildGranularityPrompt(const std::vector<LabeledSegment>& segments,
                                   const ObservationLog& log) {
  std::string body;
  for (size_t i = 0; i < segments.size(); ++i) {
    const LabeledSegment& s = segments[i];
    body += "Segment " + std::to_string(i + 1) + ": " +
            (s.tasks.empty() ? std::string("unknown") : s.tasks.front()) + "\n";
    for (const std::string& line :
         SegmentObservationLines(log, s.start_frame, s.end_frame, s.focus_object_id)) {
      body += line + "\n";
    }
  }
  if (!body.empty()) body.pop_back();
  return std::string(kGranularityPromptMarker) +
         ", delimited by triple quotes. Each segment names the short task the "
         "robot solved followed by its observations.\n\n"
         "Determine the single higher-level task the robot solved across all "
         "segments, as a short instruction. Output the reasoning delimited by "
         "***.\n\n" +
         kJsonContract + "Segments: ```" + body + kFence;
}

std::string BuildMultipleChoicePrompt(const std::vector<std::string>& lines,
                                      const std::vector<std::string>& choices) {
  std::string list;
  for (const std::string& c : choices) list += "- " + c + "\n";
  return "You will be provided with observations of a robot interaction and a "
         "list of candidate tasks. " +
         std::string(kMultipleChoicePromptMarker) +
         " that the robot solved, copying them verbatim. Output the reasoning "
         "delimited by ***.\n\n" +
         kJsonContract + "Tasks:\n" + list + "\n" + kObservationsOpen +
         Join(lines, "\n") + kFence;
}

std::vector<std::string> ExtractObservationLines(const std::string& prompt) {
  const size_t open = prompt.rfind(kObservationsOpen);
  if (open == std::string::npos) return {};
  const size_t from = open + std::string(kObservationsOpen).size();
  const size_t close = prompt.find(kFence, from);
  const std::string block =
      prompt.substr(from, close == std::string::npos ? std::string::npos : close - from);
  if (block.empty()) return {};
  return Split(block, '\n');
}

LabelResponse ParseLabelResponse(const std::string& raw) {
  const nlohmann::json j = ExtractJson(raw);
  LabelResponse r;
  r.tasks = SplitNonEmpty(FieldAsString(j, "tasks", raw), ';');
  for (const std::string& c : SplitNonEmpty(FieldAsString(j, "confidence", raw), ',')) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(c.data(), c.data() + c.size(), v);
    if (ec != std::errc() || ptr != c.data() + c.size()) {
      throw ResponseError("confidence '" + c + "' is not a number", raw);
    }
    if (!(v >= 0.0 && v <= 10.0)) {
      throw ResponseError("confidence " + c + " outside [0, 10]", raw);
    }
    r.confidences.push_back(v);
  }
  if (r.tasks.size() != r.confidences.size()) {
    throw ResponseError("count mismatch: " + std::to_string(r.tasks.size()) +
                            " tasks, " + std::to_string(r.confidences.size()) +
                            " confidences",
                        raw);
  }
  return r;
}

std::string RenderLabelResponse(const LabelResponse& response,
                                const std::string& reasoning) {
  std::vector<std::string> confs;
  for (double c : response.confidences) confs.push_back(FormatDouble(c));
  nlohmann::ordered_json j;
  j["tasks"] = Join(response.tasks, "; ");
  j["confidence"] = Join(confs, ", ");
  std::string out;
  if (!reasoning.empty()) out = "***" + reasoning + "***\n";
  return out + j.dump();
}

std::vector<std::string> ParseTaskList(const std::string& raw) {
  std::vector<std::string> out;
  for (const std::string& part : Split(raw, ',')) {
    std::string t = StripQuotes(part);
    if (!t.empty()) out.push_back(std::move(t));
  }
  return out;
}

LabeledSegment LabelSegment(const ObservationLog& log, int64_t start,
                            int64_t end, int focus, LabelClient& client,
                            const LabelOptions& options) {
  if (end <= start) throw LabelError("segment end must follow its start");
  const std::string prompt = BuildObjectPrompt(log, start, end, focus);
  const LabelResponse r = ParseLabelResponse(client.Ask(prompt));
  LabeledSegment seg;
  seg.start_frame = start;
  seg.end_frame = end;
  seg.focus_object_id = focus;
  for (size_t i = 0; i < r.tasks.size(); ++i) {
    if (options.keep_all || r.confidences[i] >= options.min_conf) {
      seg.tasks.push_back(r.tasks[i]);
      seg.confidences.push_back(r.confidences[i]);
    }
  }
  if (seg.tasks.empty()) throw LabelError("no confident label");
  seg.ambiguous = seg.tasks.size() > 1;
  return seg;
}

LabeledSegment AggregateGranularity(const std::vector<LabeledSegment>& segments,
                                    const ObservationLog& log,
                                    LabelClient& client,
                                    const LabelOptions& options) {
  if (segments.size() < 2) {
    throw LabelError("granularity aggregation needs at least two segments");
  }
  const LabelResponse r =
      ParseLabelResponse(client.Ask(BuildGranularityPrompt(segments, log)));
  LabeledSegment out;
  out.start_frame = segments.front().start_frame;
  out.end_frame = segments.back().end_frame;
  for (const LabeledSegment& s : segments) {
    out.start_frame = std::min(out.start_frame, s.start_frame);
    out.end_frame = std::max(out.end_frame, s.end_frame);
  }
  out.focus_object_id = segments.back().focus_object_id;
  for (size_t i = 0; i < r.tasks.size(); ++i) {
    if (options.keep_all || r.confidences[i] >= options.min_conf) {
      out.tasks.push_back(r.tasks[i]);
      out.confidences.push_back(r.confidences[i]);
    }
  }
  if (out.tasks.empty()) throw LabelError("no confident label");
  out.ambiguous = out.tasks.size() > 1;
  return out;
}

std::vector<std::string> MultipleChoice(const ObservationLog& log, int64_t start,
                                        int64_t end, int focus,
                                        const std::vector<std::string>& choices,
                                        LabelClient& client,
                                        std::vector<std::string>* warnings) {
  if (choices.empty()) throw LabelError("multiple choice needs at least one choice");
  const std::string raw = client.Ask(BuildMultipleChoicePrompt(
      SegmentObservationLines(log, start, end, focus), choices));
  const nlohmann::json j = ExtractJson(raw);
  std::vector<std::string> picked;
  for (const std::string& answer : SplitNonEmpty(FieldAsString(j, "tasks", raw), ';')) {
    auto it = std::find_if(choices.begin(), choices.end(), [&](const std::string& c) {
      return NormalizeText(c) == NormalizeText(answer);
    });
    if (it == choices.end()) {
      throw ResponseError("answer '" + answer + "' is not among the choices", raw);
    }
    if (std::find(picked.begin(), picked.end(), *it) == picked.end()) picked.push_back(*it);
  }
  if (picked.empty()) throw ResponseError("no task selected", raw);
  if (picked.size() > 2) {
    if (warnings != nullptr) {
      warnings->push_back("model selected " + std::to_string(picked.size()) +
                          " tasks; keeping the first two");
    }
    picked.resize(2);
  }
  return picked;
}

EpisodeLabels LabelEpisode(const ObservationLog& log,
                           const std::vector<Keystate>& keystates,
                           int64_t first_frame, LabelClient& client,
                           const LabelOptions& options, int max_in_flight) {
  struct Job {
    int64_t start, end;
    const Keystate* keystate;
  };
  std::vector<Job> jobs;
  int64_t prev = first_frame;
  for (const Keystate& k : keystates) {
    jobs.push_back({prev, k.frame_index, &k});
    prev = k.frame_index;
  }

  struct Outcome {
    std::optional<LabeledSegment> segment;
    std::string error;
  };
  auto run = [&](const Job& job) {
    Outcome o;
    try {
      o.segment = LabelSegment(log, job.start, job.end, job.keystate->object_id,
                               client, options);
      o.segment->alternates = job.keystate->alternates;
    } catch (const LabelError& e) {
      o.error = e.what();
    } catch (const ResponseError& e) {
      o.error = e.what();
    }
    return o;
  };

  std::vector<Outcome> outcomes(jobs.size());
  const size_t cap = static_cast<size_t>(std::max(1, max_in_flight));
  for (size_t base = 0; base < jobs.size(); base += cap) {
    const size_t stop = std::min(jobs.size(), base + cap);
    if (cap == 1) {
      outcomes[base] = run(jobs[base]);
      continue;
    }
    std::vector<std::future<Outcome>> futures;
    for (size_t i = base; i < stop; ++i) {
      futures.push_back(std::async(std::launch::async, run, jobs[i]));
    }
    for (size_t i = base; i < stop; ++i) outcomes[i] = futures[i - base].get();
  }

  EpisodeLabels out;
  for (size_t i = 0; i < jobs.size(); ++i) {
    if (outcomes[i].segment) {
      out.segments.push_back(std::move(*outcomes[i].segment));
    } else {
      out.skipped.push_back(std::to_string(jobs[i].start) + " " +
                            std::to_string(jobs[i].end) + " " +
                            std::to_string(jobs[i].keystate->object_id) + ": " +
                            outcomes[i].error);
    }
  }
  std::stable_sort(out.segments.begin(), out.segments.end(),
                   [](const LabeledSegment& a, const LabeledSegment& b) {
                     return a.start_frame < b.start_frame;
                   });
  return out;
}

}  // namespace playseg
