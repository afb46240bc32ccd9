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

#include <filesystem>
#include <sstream>
#include <string>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "commands.h"
#include "playseg/artifacts.h"
#include "playseg/stream.h"
#include "scratch.h"

namespace playseg::cli {
namespace {

namespace fs = std::filesystem;
using playseg::testing::ScratchDir;

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    SynthArgs s;
    s.seed = 40;
    s.count = 2;
    s.random.num_tasks = 4;
    s.out_dir = data_.path();
    ASSERT_EQ(RunSynth(s, out_, err_), kExitOk) << err_.str();
  }

  int Label(const fs::path& out_dir, std::vector<std::string> overrides = {}) {
    LabelArgs a;
    a.episode_dir = data_.path();
    a.out_dir = out_dir;
    a.config.overrides = std::move(overrides);
    return RunLabel(a, out_, err_);
  }

  ScratchDir data_{"cli_data"};
  std::ostringstream out_, err_;
};

TEST_F(CliTest, SynthWritesAllFiles) {
  for (const char* id : {"synth_40", "synth_41"}) {
    for (const char* suffix : {kEpisodeSuffix, kScriptSuffix, kTruthSuffix}) {
      EXPECT_TRUE(fs::exists(data_ / (std::string(id) + suffix))) << id << suffix;
    }
  }
}

TEST_F(CliTest, LabelThenEvaluate) {
  ScratchDir out("cli_out");
  ASSERT_EQ(Label(out.path()), kExitOk) << err_.str();
  for (const char* suffix : {kRegistrySuffix, kObservationsSuffix, kKeystatesSuffix, kLabelsSuffix}) {
    EXPECT_TRUE(fs::exists(out / (std::string("synth_40") + suffix))) << suffix;
  }
  const auto manifest = nlohmann::json::parse(ReadFile(out / kManifestFile));
  EXPECT_EQ(manifest["failed"], 0);
  EXPECT_EQ(manifest["episodes"].size(), 2u);
  EXPECT_TRUE(fs::exists(out / kTimingFile));

  EvalKeystatesArgs ek;
  ek.pred_dir = out.path();
  ek.gt_dir = data_.path();
  ek.report = out / "ks.txt";
  out_.str("");
  ASSERT_EQ(RunEvalKeystates(ek, out_, err_), kExitOk) << err_.str();
  EXPECT_NE(out_.str().find("recall 8 "), std::string::npos) << out_.str();
  EXPECT_EQ(ReadFile(out / "ks.txt"), out_.str());

  EvalGroundingArgs eg;
  eg.labels_dir = out.path();
  eg.gt_dir = data_.path();
  eg.config.overrides = {"eval.grounding_mode=single"};
  out_.str("");
  ASSERT_EQ(RunEvalGrounding(eg, out_, err_), kExitOk) << err_.str();
  EXPECT_NE(out_.str().find("accuracy_single 8 "), std::string::npos) << out_.str();

  out_.str("");
  EXPECT_EQ(RunInspect(out / "synth_41.labels.jsonl", out_, err_), kExitOk);
  EXPECT_FALSE(out_.str().empty());
}

TEST_F(CliTest, LabelOutputIsDeterministicAcrossWorkerCounts) {
  ScratchDir a("cli_a"), b("cli_b");
  ASSERT_EQ(Label(a.path(), {"run.workers=1"}), kExitOk);
  ASSERT_EQ(Label(b.path(), {"run.workers=2"}), kExitOk);
  for (const auto& entry : fs::directory_iterator(a.path())) {
    const std::string name = entry.path().filename().string();
    if (name == kTimingFile || name == kManifestFile) continue;
    EXPECT_EQ(ReadFile(entry.path()), ReadFile(b / name)) << name;
  }
}

TEST_F(CliTest, ConfigErrorsExitTwo) {
  ScratchDir out("cli_out");
  EXPECT_EQ(Label(out.path(), {"keystates.thetaa=0.3"}), kExitConfig);
  EXPECT_NE(err_.str().find("config error: keystates.thetaa"), std::string::npos) << err_.str();
}

TEST_F(CliTest, MissingScriptFailsThatEpisodeOnly) {
  fs::remove(data_ / "synth_41.script.jsonl");
  ScratchDir out("cli_out");
  EXPECT_EQ(Label(out.path()), kExitFailure);
  const auto manifest = nlohmann::json::parse(ReadFile(out / kManifestFile));
  EXPECT_EQ(manifest["failed"], 1);
  EXPECT_TRUE(fs::exists(out / "synth_40.labels.jsonl"));
}

TEST_F(CliTest, MismatchedIdsAreReported) {
  ScratchDir out("cli_out");
  ASSERT_EQ(Label(out.path()), kExitOk);
  fs::remove(data_ / "synth_41.truth.jsonl");
  EvalKeystatesArgs ek;
  ek.pred_dir = out.path();
  ek.gt_dir = data_.path();
  EXPECT_EQ(RunEvalKeystates(ek, out_, err_), kExitFailure);
  EXPECT_NE(err_.str().find("only in predictions: synth_41"), std::string::npos) << err_.str();
}

TEST(CliScriptTest, BadScriptIsReported) {
  ScratchDir dir("cli_script");
  WriteFile(dir / "bad.script.jsonl", "{\"record\":\"episode\",\"episode_id\":\"b\"}\n{\"record\":\"task\"}\n");
  SynthArgs s;
  s.script = dir / "bad.script.jsonl";
  s.out_dir = dir.path();
  std::ostringstream out, err;
  EXPECT_EQ(RunSynth(s, out, err), kExitFailure);
  EXPECT_NE(err.str().find("script error:"), std::string::npos);
}

}  // namespace
}  // namespace playseg::cli
