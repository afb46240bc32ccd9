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

#ifndef PLAYSEG_EVALUATOR_H_
#define PLAYSEG_EVALUATOR_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace playseg {

struct MatchPair {
  int64_t pred = 0;
  int64_t gt = 0;
  friend bool operator==(const MatchPair&, const MatchPair&) = default;
};

struct KeystateMatch {
  std::vector<MatchPair> pairs;  // in acceptance order
  size_t num_pred = 0;
  size_t num_gt = 0;
  size_t tp() const { return pairs.size(); }
  size_t fp() const { return num_pred - pairs.size(); }
  size_t fn() const { return num_gt - pairs.size(); }
};

// TP / (TP + FP) and TP / (TP + FN). With nothing on either side both are
// 1; otherwise an empty denominator gives 0.
double Precision(size_t tp, size_t fp, size_t fn);
double Recall(size_t tp, size_t fp, size_t fn);

// Greedy one-to-one matching by ascending |pred - gt| over pairs within
// epsilon. Ties break on lower pred index, then lower gt index.
KeystateMatch MatchKeystates(const std::vector<int64_t>& pred,
                             const std::vector<int64_t>& gt, int64_t epsilon);

struct ScoredFrame {
  int64_t frame = 0;
  double score = 0.0;
};

// Orders predictions by descending score (ties: earlier frame first).
void SortByScore(std::vector<ScoredFrame>& pred);

// One hit/miss flag per prediction in score order: each prediction takes the
// nearest unused gt within epsilon (ties: earlier gt).
std::vector<bool> RankHits(const std::vector<ScoredFrame>& sorted_pred,
                           const std::vector<int64_t>& gt, int64_t epsilon);

// Area under the max-precision-interpolated PR curve for ranked hit flags
// against `num_gt` positives. Empty gt: 1 if there are no predictions, else 0.
double ApFromHits(const std::vector<bool>& hits, size_t num_gt);

double KeystateAp(std::vector<ScoredFrame> pred, const std::vector<int64_t>& gt,
                  int64_t epsilon);

// Arithmetic mean of KeystateAp over `tolerances`. Throws ValidationError
// for an empty tolerance list.
double MeanAp(const std::vector<ScoredFrame>& pred, const std::vector<int64_t>& gt,
              const std::vector<int64_t>& tolerances);

// round(factor * mean(end - start)) over the task spans; 0 without spans.
int64_t EpsilonFromTaskLength(const std::vector<std::pair<int64_t, int64_t>>& spans,
                              double factor);

struct EpisodeKeystates {
  std::string episode_id;
  std::vector<ScoredFrame> pred;
  std::vector<int64_t> gt;
};

struct EpisodePair {
  std::string episode_id;
  MatchPair pair;
};

struct KeystateEvalReport {
  int64_t epsilon = 0;
  size_t tp = 0, fp = 0, fn = 0;
  double precision = 0.0;
  double recall = 0.0;
  // Pooled over episodes: predictions of all episodes ranked together, each
  // matched only within its own episode.
  double ap = 0.0;
  std::vector<EpisodePair> matched;
};

KeystateEvalReport EvaluateKeystates(const std::vector<EpisodeKeystates>& episodes,
                                     int64_t epsilon);

struct KeystateSummary {
  std::vector<KeystateEvalReport> per_epsilon;
  double map = 0.0;  // mean of per_epsilon[i].ap
  size_t episodes = 0;
};

// Throws ValidationError for an empty tolerance list or a negative entry.
KeystateSummary SummarizeKeystates(const std::vector<EpisodeKeystates>& episodes,
                                   const std::vector<int64_t>& tolerances);

// Human table, then one "metric epsilon value" line per number.
std::string RenderKeystateReport(const KeystateSummary& summary);

enum class GroundingMode { kAmb, kSingle };
std::string_view GroundingModeName(GroundingMode mode);
// "amb" or "single", case-insensitive. Throws ValidationError otherwise.
GroundingMode GroundingModeFromName(std::string_view name);

struct GroundingVerdict {
  std::string episode_id;
  std::string gt;
  std::vector<std::string> tasks;
  bool correct = false;
};

struct GroundingReport {
  GroundingMode mode = GroundingMode::kAmb;
  double accuracy = 0.0;  // 1 over zero segments
  std::vector<GroundingVerdict> verdicts;
};

// Lowercase, trim, collapse whitespace, drop one trailing period.
bool SameTask(std::string_view a, std::string_view b);

bool GroundingCorrect(const std::vector<std::string>& tasks, const std::string& gt,
                      GroundingMode mode);

// Positional verdicts. Throws ValidationError when the counts differ.
GroundingReport GroundingAccuracy(const std::vector<std::vector<std::string>>& predicted,
                                  const std::vector<std::string>& gt,
                                  GroundingMode mode);

struct PredictedSegment {
  int64_t end_frame = 0;
  std::vector<std::string> tasks;
};
struct GroundTruthTask {
  int64_t end_frame = 0;
  std::string task;
};
struct EpisodeGrounding {
  std::string episode_id;
  std::vector<PredictedSegment> pred;
  std::vector<GroundTruthTask> gt;
};

// Pairs each gt task with the predicted segment whose end frame matches its
// keystate under MatchKeystates(epsilon); unmatched gt tasks get no tasks
// and count as wrong. Unmatched predictions do not count.
GroundingReport EvaluateGrounding(const std::vector<EpisodeGrounding>& episodes,
                                  int64_t epsilon, GroundingMode mode);

std::string RenderGroundingReport(const GroundingReport& report, int64_t epsilon);

}  // namespace playseg

#endif  // PLAYSEG_EVALUATOR_H_
