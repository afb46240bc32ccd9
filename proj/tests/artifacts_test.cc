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

#include <string>

#include <gtest/gtest.h>

#include "playseg/artifacts.h"
#include "playseg/config.h"
#include "playseg/error.h"
#include "playseg/stream.h"
#include "scratch.h"
#include "suites.h"

namespace playseg {
namespace {

class ArtifactsTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    run_ = new testing::EpisodeRun(testing::RunSynthEpisode(2, testing::NoiseFreeOptions(), Config{}, true));
  }
  static void TearDownTestSuite() { delete run_; }
  static testing::EpisodeRun* run_;
};

testing::EpisodeRun* ArtifactsTest::run_ = nullptr;

TEST_F(ArtifactsTest, RegistryRoundTrip) {
  std::string id;
  const std::string text = SerializeRegistry("ep2", run_->result.registry);
  EXPECT_EQ(ParseRegistry(text, &id), run_->result.registry);
  EXPECT_EQ(id, "ep2");
  EXPECT_EQ(text.rfind("{\"record\":\"meta\"", 0), 0u) << text.substr(0, 40);
}

TEST_F(ArtifactsTest, ObservationsRoundTrip) {
  std::string id;
  EXPECT_EQ(ParseObservations(SerializeObservations("ep2", run_->result.observations), &id),
            run_->result.observations);
  EXPECT_EQ(id, "ep2");
}

TEST_F(ArtifactsTest, KeystatesRoundTrip) {
  KeystateFile f{"ep2", run_->result.weights, 0.25, 8, run_->result.keystates};
  const KeystateFile back = ParseKeystates(SerializeKeystates(f));
  EXPECT_EQ(back.episode_id, "ep2");
  EXPECT_EQ(back.weights, f.weights);
  EXPECT_EQ(back.keystates, f.keystates);
  EXPECT_EQ(SerializeKeystates(back), SerializeKeystates(f));
}

TEST_F(ArtifactsTest, LabelsRoundTrip) {
  LabelFile f{"ep2", run_->result.labels};
  f.labels.skipped.push_back("10 20 3: nothing to label");
  const LabelFile back = ParseLabels(SerializeLabels(f));
  EXPECT_EQ(back.labels.segments, f.labels.segments);
  EXPECT_EQ(back.labels.skipped, f.labels.skipped);
}

TEST_F(ArtifactsTest, TruthRoundTrip) {
  const GroundTruth back = ParseTruth(SerializeTruth(run_->truth));
  EXPECT_EQ(back.episode_id, run_->truth.episode_id);
  EXPECT_EQ(back.keystates, run_->truth.keystates);
  EXPECT_EQ(back.tasks, run_->truth.tasks);
  EXPECT_EQ(back.registry, run_->truth.registry);
}

TEST(ArtifactParseTest, BadLineNumberReported) {
  try {
    ParseObservations("{\"record\":\"meta\",\"artifact\":\"observations\",\"episode_id\":\"x\"}\n{broken\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2);
  }
  EXPECT_THROW(ParseKeystates(""), ParseError);
}

TEST(ArtifactPathTest, IdsAndListing) {
  EXPECT_EQ(EpisodeIdFromPath("/a/b/ep_7.labels.jsonl", kLabelsSuffix), "ep_7");
  EXPECT_EQ(EpisodeIdFromPath("/a/b/ep_7.labels.json", kLabelsSuffix), "");
  testing::ScratchDir dir("artifacts");
  WriteFile(dir / "b.truth.jsonl", "");
  WriteFile(dir / "a.truth.jsonl", "");
  WriteFile(dir / "c.labels.jsonl", "");
  const auto listed = ListArtifacts(dir.path(), kTruthSuffix);
  ASSERT_EQ(listed.size(), 2u);
  EXPECT_EQ(listed.begin()->first, "a");
  EXPECT_THROW(ListArtifacts(dir / "nope", kTruthSuffix), IoError);
  EXPECT_THROW(PrettyPrint(dir / "c.unknown"), ParseError);
}

}  // namespace
}  // namespace playseg
