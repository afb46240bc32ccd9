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

#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "playseg/error.h"
#include "playseg/keystates.h"
#include "playseg/pipeline.h"
#include "suites.h"

namespace playseg {
namespace {

KeystateCandidate Fire(Heuristic h, int64_t frame, double conf, int object = 0) {
  return {object, frame, h, conf};
}

std::set<Heuristic> FourHeuristics() {
  return {Heuristic::kGripperClose, Heuristic::kGripperNear, Heuristic::kObjectMovement,
          Heuristic::kStateChange};
}

TEST(ScoreCandidatesTest, WeightedSum) {
  const auto ks = ScoreCandidates({Fire(Heuristic::kGripperClose, 10, 1.0), Fire(Heuristic::kStateChange, 12, 0.8)},
                                  EqualWeights(FourHeuristics()), 8);
  ASSERT_EQ(ks.size(), 1u);
  EXPECT_NEAR(ks[0].score, 0.45, 1e-12);
  EXPECT_EQ(ks[0].frame_index, 12);
  EXPECT_EQ(ks[0].first_frame, 10);
}

TEST(ScoreCandidatesTest, AllFiringIsOne) {
  std::vector<KeystateCandidate> c;
  for (Heuristic h : kAllHeuristics) c.push_back(Fire(h, 5, 1.0));
  const std::set<Heuristic> all(std::begin(kAllHeuristics), std::end(kAllHeuristics));
  const auto ks = ScoreCandidates(c, EqualWeights(all), 8);
  ASSERT_EQ(ks.size(), 1u);
  EXPECT_NEAR(ks[0].score, 1.0, 1e-12);
}

TEST(ScoreCandidatesTest, NothingFiresNothingEmitted) {
  EXPECT_TRUE(ScoreCandidates({}, EqualWeights(FourHeuristics()), 8).empty());
  // Firings of a heuristic without weight are ignored outright.
  EXPECT_TRUE(ScoreCandidates({Fire(Heuristic::kRelationChange, 3, 1.0)}, EqualWeights(FourHeuristics()), 8)
                  .empty());
}

TEST(ScoreCandidatesTest, RepeatedHeuristicCountsOnce) {
  const auto ks = ScoreCandidates({Fire(Heuristic::kGripperNear, 1, 0.3), Fire(Heuristic::kGripperNear, 4, 0.9)},
                                  EqualWeights({Heuristic::kGripperNear, Heuristic::kGripperClose}), 8);
  ASSERT_EQ(ks.size(), 1u);
  EXPECT_NEAR(ks[0].score, 0.45, 1e-12);
}

TEST(ScoreCandidatesTest, InvalidWeightsThrow) {
  EXPECT_THROW(ScoreCandidates({}, {{Heuristic::kGripperClose, 0.7}}, 8), ValidationError);
  EXPECT_THROW(ValidateWeights({{Heuristic::kGripperClose, 1.2}, {Heuristic::kGripperNear, -0.2}}),
               ValidationError);
}

Keystate At(int64_t frame, double score, int object = 0) {
  Keystate k;
  k.frame_index = frame;
  k.first_frame = frame;
  k.score = score;
  k.object_id = object;
  return k;
}

TEST(ThresholdTest, Examples) {
  const std::vector<Keystate> ks{At(1, 0.2), At(20, 0.45), At(40, 0.9)};
  const auto kept = Threshold(ks, 0.25);
  ASSERT_EQ(kept.size(), 2u);
  EXPECT_DOUBLE_EQ(kept[0].score, 0.45);
  EXPECT_DOUBLE_EQ(kept[1].score, 0.9);
  EXPECT_EQ(Threshold(ks, 0.0).size(), 3u);
  EXPECT_EQ(Threshold(ks, 0.45).size(), 2u);
}

TEST(AggregateTest, Examples) {
  auto out = Aggregate({At(10, 0.5, 1), At(12, 0.9, 2)}, 8);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_DOUBLE_EQ(out[0].score, 0.9);
  EXPECT_EQ(out[0].alternates, (std::vector<int>{1}));

  EXPECT_EQ(Aggregate({At(10, 0.5), At(30, 0.9)}, 8).size(), 2u);

  out = Aggregate({At(13, 0.6, 1), At(10, 0.6, 2)}, 8);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].frame_index, 10);
}

TEST(AggregateTest, OutputOrderedByFrame) {
  const auto out = Aggregate({At(50, 0.3), At(10, 0.9), At(30, 0.6)}, 8);
  ASSERT_EQ(out.size(), 3u);
  EXPECT_EQ(out[0].frame_index, 10);
  EXPECT_EQ(out[2].frame_index, 50);
}

TEST(HeuristicNameTest, RoundTrip) {
  for (Heuristic h : kAllHeuristics) EXPECT_EQ(HeuristicFromName(HeuristicName(h)), h);
  EXPECT_FALSE(HeuristicFromName("telepathy"));
}

TEST(EffectiveWeightsTest, RenormalizesOverAvailable) {
  KeystateConfig cfg;
  cfg.weights = {{Heuristic::kGripperClose, 0.5}, {Heuristic::kStateChange, 0.25}, {Heuristic::kGripperNear, 0.25}};
  const auto w = EffectiveWeights(cfg, {Heuristic::kGripperClose, Heuristic::kGripperNear});
  ASSERT_EQ(w.size(), 2u);
  EXPECT_NEAR(w.at(Heuristic::kGripperClose), 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(w.at(Heuristic::kGripperNear), 1.0 / 3.0, 1e-12);

  const auto eq = EffectiveWeights(KeystateConfig{}, {Heuristic::kObjectMovement, Heuristic::kStateChange});
  EXPECT_NEAR(eq.at(Heuristic::kObjectMovement), 0.5, 1e-12);
  EXPECT_THROW(EffectiveWeights(KeystateConfig{}, {}), ValidationError);
}

TEST(AvailableHeuristicsTest, FollowsSignals) {
  EpisodeSignals s;
  const std::set<Heuristic> all(std::begin(kAllHeuristics), std::end(kAllHeuristics));
  const auto none = AvailableHeuristics(s, all);
  EXPECT_FALSE(none.count(Heuristic::kGripperClose));
  EXPECT_FALSE(none.count(Heuristic::kStateChange));
  s.has_gripper = true;
  s.has_state_scores = true;
  const auto some = AvailableHeuristics(s, all);
  EXPECT_TRUE(some.count(Heuristic::kGripperClose));
  EXPECT_TRUE(some.count(Heuristic::kStateChange));
  EXPECT_FALSE(AvailableHeuristics(s, {Heuristic::kObjectMovement}).count(Heuristic::kGripperClose));
}

TEST(Eq1Suite, MatchesHandSumAndNests) {
  const auto r = testing::RunEq1Suite(21, 300, 400);
  EXPECT_EQ(r.instances, 300u);
  EXPECT_GT(r.keystates_checked, 300u);
  EXPECT_EQ(r.missing, 0u);
  EXPECT_LE(r.max_error, 1e-12);
  EXPECT_EQ(r.theta_pairs, 400u);
  EXPECT_EQ(r.violations, 0u);
}

}  // namespace
}  // namespace playseg
