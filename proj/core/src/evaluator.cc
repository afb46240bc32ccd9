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

#include "playseg/evaluator.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <tuple>

#include "playseg/error.h"
#include "playseg/text.h"

namespace playseg {

namespace {

std::string Fixed(double v, int digits = 4) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

// Index of the nearest unused gt within epsilon, or -1.
int NearestUnused(int64_t frame, const std::vector<int64_t>& gt,
                  const std::vector<bool>& used, int64_t epsilon) {
  int best = -1;
  int64_t best_d = 0;
  for (size_t g = 0; g < gt.size(); ++g) {
    if (used[g]) continue;
    const int64_t d = std::llabs(frame - gt[g]);
    if (d > epsilon) continue;
    if (best < 0 || d < best_d || (d == best_d && gt[g] < gt[best])) {
      best = static_cast<int>(g);
      best_d = d;
    }
  }
  return best;
}

}  // namespace

double Precision(size_t tp, size_t fp, size_t fn) {
  if (tp + fp == 0) return fn == 0 ? 1.0 : 0.0;
  return static_cast<double>(tp) / static_cast<double>(tp + fp);
}

double Recall(size_t tp, size_t fp, size_t fn) {
  if (tp + fn == 0) return fp == 0 ? 1.0 : 0.0;
  return static_cast<double>(tp) / static_cast<double>(tp + fn);
}

KeystateMatch MatchKeystates(const std::vector<int64_t>& pred,
                             const std::vector<int64_t>& gt, int64_t epsilon) {
  if (epsilon < 0) throw ValidationError("epsilon", "must be non-negative");
  std::vector<std::tuple<int64_t, size_t, size_t>> cand;
  for (size_t p = 0; p < pred.size(); ++p) {
    for (size_t g = 0; g < gt.size(); ++g) {
      const int64_t d = std::llabs(pred[p] - gt[g]);
      if (d <= epsilon) cand.emplace_back(d, p, g);
    }
  }
  std::sort(cand.begin(), cand.end());
  std::vector<bool> pred_used(pred.size()), gt_used(gt.size());
  KeystateMatch m;
  m.num_pred = pred.size();
  m.num_gt = gt.size();
  for (const auto& [d, p, g] : cand) {
    if (pred_used[p] || gt_used[g]) continue;
    pred_used[p] = gt_used[g] = true;
    m.pairs.push_back({pred[p], gt[g]});
  }
  return m;
}

void SortByScore(std::vector<ScoredFrame>& pred) {
  std::stable_sort(pred.begin(), pred.end(), [](const ScoredFrame& a, const ScoredFrame& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.frame < b.frame;
  });
}

std::vector<bool> RankHits(const std::vector<ScoredFrame>& sorted_pred,
                           const std::vector<int64_t>& gt, int64_t epsilon) {
  std::vector<bool> used(gt.size()), hits;
  hits.reserve(sorted_pred.size());
  for (const ScoredFrame& p : sorted_pred) {
    const int g = NearestUnused(p.frame, gt, used, epsilon);
    if (g >= 0) used[g] = true;
    hits.push_back(g >= 0);
  }
  return hits;
}

double ApFromHits(const std::vector<bool>& hits, size_t num_gt) {
  if (num_gt == 0) return hits.empty() ? 1.0 : 0.0;
  std::vector<double> precision(hits.size());
  size_t tp = 0;
  for (size_t i = 0; i < hits.size(); ++i) {
    if (hits[i]) ++tp;
    precision[i] = static_cast<double>(tp) / static_cast<double>(i + 1);
  }
  // Interpolate: precision at rank i becomes the max over ranks >= i.
  for (size_t i = hits.size(); i-- > 1;) {
    precision[i - 1] = std::max(precision[i - 1], precision[i]);
  }
  double sum = 0.0;
  for (size_t i = 0; i < hits.size(); ++i) {
    if (hits[i]) sum += precision[i];
  }
  return sum / static_cast<double>(num_gt);
}

double KeystateAp(std::vector<ScoredFrame> pred, const std::vector<int64_t>& gt,
                  int64_t epsilon) {
  if (epsilon < 0) throw ValidationError("epsilon", "must be non-negative");
  SortByScore(pred);
  return ApFromHits(RankHits(pred, gt, epsilon), gt.size());
}

double MeanAp(const std::vector<ScoredFrame>& pred, const std::vector<int64_t>& gt,
              const std::vector<int64_t>& tolerances) {
  if (tolerances.empty()) throw ValidationError("tolerances", "must not be empty");
  double sum = 0.0;
  for (int64_t eps : tolerances) sum += KeystateAp(pred, gt, eps);
  return sum / static_cast<double>(tolerances.size());
}

int64_t EpsilonFromTaskLength(const std::vector<std::pair<int64_t, int64_t>>& spans,
                              double factor) {
  if (spans.empty()) return 0;
  double total = 0.0;
  for (const auto& [start, end] : spans) total += static_cast<double>(end - start);
  return std::llround(factor * total / static_cast<double>(spans.size()));
}

KeystateEvalReport EvaluateKeystates(const std::vector<EpisodeKeystates>& episodes,
                                     int64_t epsilon) {
  KeystateEvalReport r;
  r.epsilon = epsilon;
  struct Ranked {
    double score;
    size_t episode;
    int64_t frame;
  };
  std::vector<Ranked> pool;
  size_t total_gt = 0;
  for (size_t e = 0; e < episodes.size(); ++e) {
    const EpisodeKeystates& ep = episodes[e];
    std::vector<int64_t> frames;
    for (const ScoredFrame& p : ep.pred) {
      frames.push_back(p.frame);
      pool.push_back({p.score, e, p.frame});
    }
    const KeystateMatch m = MatchKeystates(frames, ep.gt, epsilon);
    r.tp += m.tp();
    r.fp += m.fp();
    r.fn += m.fn();
    for (const MatchPair& pair : m.pairs) r.matched.push_back({ep.episode_id, pair});
    total_gt += ep.gt.size();
  }
  r.precision = Precision(r.tp, r.fp, r.fn);
  r.recall = Recall(r.tp, r.fp, r.fn);

  std::stable_sort(pool.begin(), pool.end(), [](const Ranked& a, const Ranked& b) {
    return std::tie(b.score, a.episode, a.frame) < std::tie(a.score, b.episode, b.frame);
  });
  std::vector<std::vector<bool>> used(episodes.size());
  for (size_t e = 0; e < episodes.size(); ++e) used[e].assign(episodes[e].gt.size(), false);
  std::vector<bool> hits;
  for (const Ranked& p : pool) {
    const int g = NearestUnused(p.frame, episodes[p.episode].gt, used[p.episode], epsilon);
    if (g >= 0) used[p.episode][g] = true;
    hits.push_back(g >= 0);
  }
  r.ap = ApFromHits(hits, total_gt);
  return r;
}

KeystateSummary SummarizeKeystates(const std::vector<EpisodeKeystates>& episodes,
                                   const std::vector<int64_t>& tolerances) {
  if (tolerances.empty()) throw ValidationError("tolerances", "must not be empty");
  KeystateSummary s;
  s.episodes = episodes.size();
  for (int64_t eps : tolerances) {
    if (eps < 0) throw ValidationError("tolerances", "must be non-negative");
    s.per_epsilon.push_back(EvaluateKeystates(episodes, eps));
    s.map += s.per_epsilon.back().ap;
  }
  s.map /= static_cast<double>(tolerances.size());
  return s;
}

std::string RenderKeystateReport(const KeystateSummary& summary) {
  std::vector<std::string> eps_list;
  for (const KeystateEvalReport& r : summary.per_epsilon) {
    eps_list.push_back(std::to_string(r.epsilon));
  }
  std::string out;
  out += "# keystates over " + std::to_string(summary.episodes) + " episodes\n";
  out += "# AP pools predictions across episodes; mAP is the mean AP over epsilon {" +
         Join(eps_list, ",") + "}\n";
  out += "epsilon      tp      fp      fn  precision  recall      ap\n";
  for (const KeystateEvalReport& r : summary.per_epsilon) {
    char line[128];
    std::snprintf(line, sizeof(line), "%7lld %7zu %7zu %7zu %10.4f %7.4f %7.4f\n",
                  static_cast<long long>(r.epsilon), r.tp, r.fp, r.fn, r.precision,
                  r.recall, r.ap);
    out += line;
  }
  out += "mAP " + Fixed(summary.map) + "\n\n";
  for (const KeystateEvalReport& r : summary.per_epsilon) {
    const std::string e = std::to_string(r.epsilon);
    out += "precision " + e + " " + FormatDouble(r.precision) + "\n";
    out += "recall " + e + " " + FormatDouble(r.recall) + "\n";
    out += "ap " + e + " " + FormatDouble(r.ap) + "\n";
    out += "tp " + e + " " + std::to_string(r.tp) + "\n";
    out += "fp " + e + " " + std::to_string(r.fp) + "\n";
    out += "fn " + e + " " + std::to_string(r.fn) + "\n";
  }
  out += "map " + Join(eps_list, ",") + " " + FormatDouble(summary.map) + "\n";
  return out;
}

std::string_view GroundingModeName(GroundingMode mode) {
  return mode == GroundingMode::kAmb ? "amb" : "single";
}

GroundingMode GroundingModeFromName(std::string_view name) {
  const std::string n = ToLower(Trim(name));
  if (n == "amb") return GroundingMode::kAmb;
  if (n == "single") return GroundingMode::kSingle;
  throw ValidationError("mode", "expected amb or single, got '" + std::string(name) + "'");
}

bool SameTask(std::string_view a, std::string_view b) {
  return NormalizeText(a) == NormalizeText(b);
}

bool GroundingCorrect(const std::vector<std::string>& tasks, const std::string& gt,
                      GroundingMode mode) {
  if (mode == GroundingMode::kSingle) return tasks.size() == 1 && SameTask(tasks[0], gt);
  return std::any_of(tasks.begin(), tasks.end(),
                     [&](const std::string& t) { return SameTask(t, gt); });
}

GroundingReport GroundingAccuracy(const std::vector<std::vector<std::string>>& predicted,
                                  const std::vector<std::string>& gt,
                                  GroundingMode mode) {
  if (predicted.size() != gt.size()) {
    throw ValidationError("segments", std::to_string(predicted.size()) +
                                          " predictions for " +
                                          std::to_string(gt.size()) + " gt tasks");
  }
  GroundingReport r;
  r.mode = mode;
  size_t correct = 0;
  for (size_t i = 0; i < gt.size(); ++i) {
    GroundingVerdict v{"", gt[i], predicted[i], GroundingCorrect(predicted[i], gt[i], mode)};
    correct += v.correct ? 1 : 0;
    r.verdicts.push_back(std::move(v));
  }
  r.accuracy = gt.empty() ? 1.0
                          : static_cast<double>(correct) / static_cast<double>(gt.size());
  return r;
}

GroundingReport EvaluateGrounding(const std::vector<EpisodeGrounding>& episodes,
                                  int64_t epsilon, GroundingMode mode) {
  GroundingReport r;
  r.mode = mode;
  size_t correct = 0;
  for (const EpisodeGrounding& ep : episodes) {
    std::vector<int64_t> pred_frames, gt_frames;
    for (const PredictedSegment& p : ep.pred) pred_frames.push_back(p.end_frame);
    for (const GroundTruthTask& g : ep.gt) gt_frames.push_back(g.end_frame);
    const KeystateMatch m = MatchKeystates(pred_frames, gt_frames, epsilon);
    std::map<size_t, size_t> gt_to_pred;
    // Pairs carry frames; map back to indices, first unused occurrence.
    std::vector<bool> pu(ep.pred.size()), gu(ep.gt.size());
    for (const MatchPair& pair : m.pairs) {
      size_t p = 0, g = 0;
      while (pu[p] || ep.pred[p].end_frame != pair.pred) ++p;
      while (gu[g] || ep.gt[g].end_frame != pair.gt) ++g;
      pu[p] = gu[g] = true;
      gt_to_pred[g] = p;
    }
    for (size_t g = 0; g < ep.gt.size(); ++g) {
      GroundingVerdict v;
      v.episode_id = ep.episode_id;
      v.gt = ep.gt[g].task;
      auto it = gt_to_pred.find(g);
      if (it != gt_to_pred.end()) v.tasks = ep.pred[it->second].tasks;
      v.correct = GroundingCorrect(v.tasks, v.gt, mode);
      correct += v.correct ? 1 : 0;
      r.verdicts.push_back(std::move(v));
    }
  }
  r.accuracy = r.verdicts.empty()
                   ? 1.0
                   : static_cast<double>(correct) / static_cast<double>(r.verdicts.size());
  return r;
}

std::string RenderGroundingReport(const GroundingReport& report, int64_t epsilon) {
  const std::string mode(GroundingModeName(report.mode));
  size_t correct = 0;
  for (const GroundingVerdict& v : report.verdicts) correct += v.correct ? 1 : 0;
  std::string out = "# grounding, mode " + mode + ", segments aligned at epsilon " +
                    std::to_string(epsilon) + "\n";
  for (const GroundingVerdict& v : report.verdicts) {
    out += (v.correct ? "ok    " : "wrong ") + v.episode_id + " | " + v.gt + " | " +
           (v.tasks.empty() ? std::string("-") : Join(v.tasks, "; ")) + "\n";
  }
  out += "accuracy " + Fixed(report.accuracy) + " (" + std::to_string(correct) + "/" +
         std::to_string(report.verdicts.size()) + ")\n\n";
  out += "accuracy_" + mode + " " + std::to_string(epsilon) + " " +
         FormatDouble(report.accuracy) + "\n";
  out += "segments " + std::to_string(epsilon) + " " +
         std::to_string(report.verdicts.size()) + "\n";
  return out;
}

}  // namespace playseg
