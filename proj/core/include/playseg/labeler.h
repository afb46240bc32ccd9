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

#ifndef PLAYSEG_LABELER_H_
#define PLAYSEG_LABELER_H_

#include <cstdint>
#include <string>
#include <vector>

#include "playseg/keystates.h"
#include "playseg/label_client.h"
#include "playseg/observations.h"
#include "playseg/registry.h"

namespace playseg {

struct LabeledSegment {
  int64_t start_frame = 0;
  int64_t end_frame = 0;
  int focus_object_id = 0;
  std::vector<std::string> tasks;
  // 0 to 10, aligned with tasks.
  std::vector<double> confidences;
  bool ambiguous = false;
  std::vector<int> alternates;
  friend bool operator==(const LabeledSegment&, const LabeledSegment&) = default;
};

// Observation lines the object prompt shows: the focus object's observations
// and all gripper proximity lines with start <= frame <= end, in log order.
std::vector<std::string> SegmentObservationLines(const ObservationLog& log,
                                                 int64_t start, int64_t end,
                                                 int focus);

// Main action retrieval prompt. Throws LabelError("nothing to label") when
// the focus object has no observation in the window.
std::string BuildObjectPrompt(const ObservationLog& log, int64_t start,
                              int64_t end, int focus);
// Substitutes prepared lines into the main prompt template.
std::string RenderObjectPrompt(const std::vector<std::string>& lines);

// Task generation prompt over the canonical names in registry order.
std::string BuildTaskListPrompt(const ObjectRegistry& registry);

std::string BuildGranularityPrompt(const std::vector<LabeledSegment>& segments,
                                   const ObservationLog& log);
std::string BuildMultipleChoicePrompt(const std::vector<std::string>& lines,
                                      const std::vector<std::string>& choices);

// Markers that identify each prompt kind (used by offline clients).
inline constexpr char kObjectPromptMarker[] =
    "You will be provided with observations of a robot interaction";
inline constexpr char kTaskListPromptMarker[] =
    "Based on the objects, give possible instructions to the robot.";
inline constexpr char kGranularityPromptMarker[] =
    "You will be provided with consecutive segments of a robot interaction";
inline constexpr char kMultipleChoicePromptMarker[] =
    "Select up to two tasks from the list";
inline constexpr char kPropertyPromptMarker[] =
    "For each object, decide whether the robot can move it";

// Observation lines between the triple-quote fence of a main prompt.
std::vector<std::string> ExtractObservationLines(const std::string& prompt);

struct LabelResponse {
  std::vector<std::string> tasks;
  std::vector<double> confidences;
  friend bool operator==(const LabelResponse&, const LabelResponse&) = default;
};

// Drops everything before the first '{' after the last "***", then reads
// "tasks" (';'-delimited) and "confidence" (','-delimited, 0 to 10). Throws
// ResponseError carrying the raw payload.
LabelResponse ParseLabelResponse(const std::string& raw);
// Inverse of ParseLabelResponse for well-formed input.
std::string RenderLabelResponse(const LabelResponse& response,
                                const std::string& reasoning = "");

// Comma-delimited task list reply.
std::vector<std::string> ParseTaskList(const std::string& raw);

struct LabelOptions {
  double min_conf = 6.0;
  // Keep every task regardless of confidence.
  bool keep_all = false;
};

// Throws LabelError (nothing to label, no confident label), ClientError or
// ResponseError.
LabeledSegment LabelSegment(const ObservationLog& log, int64_t start,
                            int64_t end, int focus, LabelClient& client,
                            const LabelOptions& options = {});

// One higher-level label spanning all inputs. Throws LabelError for fewer
// than two segments.
LabeledSegment AggregateGranularity(const std::vector<LabeledSegment>& segments,
                                    const ObservationLog& log,
                                    LabelClient& client,
                                    const LabelOptions& options = {});

// Returns one or two entries of `choices`, verbatim. A longer reply is cut
// to two and a note appended to `warnings`. Throws ResponseError for an
// answer not on the list and LabelError for empty choices.
std::vector<std::string> MultipleChoice(const ObservationLog& log, int64_t start,
                                        int64_t end, int focus,
                                        const std::vector<std::string>& choices,
                                        LabelClient& client,
                                        std::vector<std::string>* warnings = nullptr);

struct EpisodeLabels {
  std::vector<LabeledSegment> segments;
  // One "start end object: reason" line per segment that produced no label.
  std::vector<std::string> skipped;
};

// Labels the window ending at each keystate, starting at the previous
// keystate (or `first_frame`). At most `max_in_flight` requests run at once;
// results are ordered by start frame.
EpisodeLabels LabelEpisode(const ObservationLog& log,
                           const std::vector<Keystate>& keystates,
                           int64_t first_frame, LabelClient& client,
                           const LabelOptions& options = {},
                           int max_in_flight = 1);

}  // namespace playseg

#endif  // PLAYSEG_LABELER_H_
