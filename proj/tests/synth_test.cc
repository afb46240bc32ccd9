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

#include <cstdlib>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "playseg/config.h"
#include "playseg/error.h"
#include "playseg/keystates.h"
#include "playseg/labeler.h"
#include "playseg/pipeline.h"
#include "playseg/synth.h"
#include "suites.h"

namespace playseg {
namespace {

Script DrawerScript() {
  Script s;
  s.episode_id = "drawer_only";
  s.num_frames = 70;
  ScriptObject drawer;
  drawer.name = "drawer";
  drawer.color = "white";
  drawer.movable = false;
  drawer.states = {"closed", "open"};
  drawer.initial_state = "open";
  drawer.position = {0.1, -0.15};
  drawer.size = {0.12, 0.08, 0.08};
  ScriptObject cup;
  cup.name = "cup";
  cup.color = "red";
  cup.position = {-0.1, 0.1};
  s.objects = {drawer, cup};
  ScriptTask close;
  close.kind = TaskKind::kClose;
  close.object = "drawer";
  close.start = 10;
  close.end = 45;
  s.tasks = {close};
  return s;
}

TEST(ScriptTest, SerializeRoundTrip) {
  const Script s = RandomScript(8);
  const Script back = ParseScript(SerializeScript(s));
  EXPECT_EQ(SerializeScript(back), SerializeScript(s));
  EXPECT_EQ(back.tasks.size(), s.tasks.size());
}

TEST(ScriptTest, ValidationNamesTheField) {
  Script s = DrawerScript();
  s.tasks[0].object = "oven";
  try {
    ValidateScript(s);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(e.field().find("object"), std::string::npos) << e.what();
  }
  s = DrawerScript();
  s.tasks[0].end = 200;
  EXPECT_THROW(ValidateScript(s), ValidationError);
  s = DrawerScript();
  s.tasks[0].kind = TaskKind::kOpen;  // already open
  EXPECT_THROW(ValidateScript(s), ValidationError);
  EXPECT_THROW(ParseScript("{\"record\":\"episode\"\n"), ParseError);
}

TEST(TaskTextTest, Templates) {
  const Script s = DrawerScript();
  EXPECT_EQ(TaskText(s.tasks[0], s), "close the drawer");
  EXPECT_TRUE(EvidenceMatches(s.tasks[0], s, "drawer changed from open to closed."));
  EXPECT_FALSE(EvidenceMatches(s.tasks[0], s, "drawer changed from closed to open."));
}

TEST(GenerateTest, SameScriptSameEpisode) {
  RandomScriptOptions opt;
  opt.noise.box_sigma = 3.0;
  opt.noise.spurious_rate = 0.1;
  const Script s = RandomScript(17, opt);
  EXPECT_EQ(Generate(s).episode, Generate(s).episode);
  EXPECT_EQ(SerializeScript(RandomScript(17, opt)), SerializeScript(s));
}

TEST(GenerateTest, NoiseLeavesTruthAlone) {
  const Script clean = RandomScript(23);
  Script noisy = clean;
  noisy.noise.box_sigma = 3.0;
  noisy.noise.dropout = 0.1;
  noisy.noise.spurious_rate = 0.1;
  noisy.noise.synonym_rate = 0.2;
  const GroundTruth a = Generate(clean).truth, b = Generate(noisy).truth;
  EXPECT_EQ(a.keystates, b.keystates);
  EXPECT_EQ(a.tasks, b.tasks);
  EXPECT_EQ(a.registry, b.registry);
  EXPECT_FALSE(Generate(clean).episode == Generate(noisy).episode);
}

TEST(GenerateTest, DropoutHidesSomeDetections) {
  RandomScriptOptions opt;
  opt.noise.dropout = 0.3;
  for (uint64_t seed = 0; seed < 10; ++seed) {
    const SynthOutput g = Generate(RandomScript(seed, opt));
    ASSERT_GE(g.episode.frames.size(), 20u);
    bool missing = false;
    for (const FrameRecord& f : g.episode.frames) {
      missing |= f.detections.size() < g.truth.registry.entries.size();
    }
    EXPECT_TRUE(missing) << "seed " << seed;
  }
}

TEST(GenerateTest, EveryKeystateHasAFiringNearby) {
  const Config cfg;
  for (uint64_t seed = 0; seed < 5; ++seed) {
    const auto run = testing::RunSynthEpisode(seed, testing::NoiseFreeOptions(), cfg, false);
    for (int64_t k : run.truth.keystates) {
      bool near = false;
      for (const KeystateCandidate& c : run.candidates) near |= std::llabs(c.frame_index - k) <= 2;
      EXPECT_TRUE(near) << "seed " << seed << " keystate " << k;
    }
  }
}

TEST(GenerateTest, SinglePickPlaceRecovered) {
  RandomScriptOptions opt;
  opt.num_tasks = 1;
  int checked = 0;
  for (uint64_t seed = 0; seed < 40 && checked < 3; ++seed) {
    const Script s = RandomScript(seed, opt);
    if (s.tasks[0].kind != TaskKind::kPickPlace) continue;
    ++checked;
    const auto run = testing::RunSynthEpisode(seed, opt, Config{}, false);
    ASSERT_EQ(run.truth.keystates.size(), 1u);
    ASSERT_EQ(run.result.keystates.size(), 1u) << "seed " << seed;
    EXPECT_LE(std::llabs(run.result.keystates[0].frame_index - run.truth.keystates[0]), 2);
  }
  EXPECT_EQ(checked, 3);
}

TEST(MockClientTest, ObjectPromptRules) {
  const Script s = DrawerScript();
  ScriptedMockClient mock(s);
  const LabelResponse hit = ParseLabelResponse(mock.Ask(RenderObjectPrompt(
      {"The gripper was close to drawer", "drawer changed from open to closed."})));
  ASSERT_FALSE(hit.tasks.empty());
  EXPECT_EQ(hit.tasks[0], "close the drawer");
  EXPECT_EQ(hit.confidences[0], 9.0);

  const LabelResponse miss = ParseLabelResponse(mock.Ask(RenderObjectPrompt({"cup moved left"})));
  ASSERT_EQ(miss.tasks.size(), 1u);
  EXPECT_LT(miss.confidences[0], 9.0);

  const LabelResponse refusal = ParseLabelResponse(mock.Ask(RenderObjectPrompt({})));
  EXPECT_TRUE(refusal.tasks.empty());
}

TEST(MockClientTest, RelationLinesStayInsideOneEvent) {
  Script s = DrawerScript();
  ScriptTask move;
  move.kind = TaskKind::kMoveCell;
  move.object = "cup";
  move.cell = "center left";
  move.start = 50;
  move.end = 65;
  s.tasks.push_back(move);
  ScriptedMockClient mock(s);
  const LabelResponse r = ParseLabelResponse(mock.Ask(RenderObjectPrompt(
      {"The gripper was close to drawer", "drawer changed from open to closed.", "cup is left of drawer",
       "cup moved from top left to center left of the table"})));
  ASSERT_GE(r.tasks.size(), 2u);
  EXPECT_EQ(r.tasks[0], "move the cup to the center left of the table");
  EXPECT_EQ(r.tasks[1], "close the drawer");
}

TEST(MockClientTest, TaskListAndProperties) {
  const Script s = RandomScript(4);
  ScriptedMockClient mock(s);
  const GroundTruth truth = Generate(s).truth;
  const auto listed = ParseTaskList(mock.Ask(BuildTaskListPrompt(truth.registry)));
  for (const TaskLabel& t : truth.tasks) {
    EXPECT_NE(std::find(listed.begin(), listed.end(), t.text), listed.end()) << t.text;
  }
  const ObjectRegistry assigned = AssignProperties(truth.registry, mock);
  EXPECT_EQ(assigned, truth.registry);
}

TEST(MockClientTest, DrawerEpisodeEndToEnd) {
  const Script s = DrawerScript();
  const SynthOutput g = Generate(s);
  ScriptedMockClient mock(s);
  const PipelineResult r = RunPipeline(g.episode, Config{}, mock);
  bool state = false, near = false;
  for (const Observation& o : r.observations) {
    state |= o.text == "drawer changed from open to closed.";
    near |= o.text == "The gripper was close to drawer";
  }
  EXPECT_TRUE(state);
  EXPECT_TRUE(near);
  ASSERT_EQ(r.labels.segments.size(), 1u);
  EXPECT_EQ(r.labels.segments[0].tasks.front(), "close the drawer");
}

}  // namespace
}  // namespace playseg
