/* Copyright 2026 The hlight Authors. All Rights Reserved.

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

#include "hlight/pipeline.h"

#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>

#include <gtest/gtest.h>

#include "hlight/commands.h"
#include "hlight/evalkit.h"
#include "hlight/pipeline_config.h"
#include "hlight/synthgen.h"
#include "test_util.h"

namespace hlight {
namespace {

using testing::PcmWav;
using testing::TempDir;

std::string ReadAll(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

PipelineConfig SmallConfig() {
  PipelineConfig c;
  c.gmm.num_components = 6;
  c.gmm.max_iters = 40;
  c.gmm.seed = 3;
  return c;
}

// One small corpus and bank shared by the whole suite.
class PipelineTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new TempDir();
    std::ostringstream log;
    cli::CmdSynthCorpus(dir_->File("corpus"), 4, 8.0, 21, 15.0, log);
    cli::CmdTrain(SmallConfig(), dir_->File("corpus"), dir_->File("bank.json"), log);
    bank_ = new ModelBank(LoadBank(dir_->File("bank.json")));
  }
  static void TearDownTestSuite() {
    delete bank_;
    delete dir_;
  }

  static TempDir* dir_;
  static ModelBank* bank_;
};

TempDir* PipelineTest::dir_ = nullptr;
ModelBank* PipelineTest::bank_ = nullptr;

MatchScript OneSceneScript() {
  MatchScript s;
  s.total_s = 40.0;
  s.seed = 12;
  s.snr_db = 15.0;
  s.events = {{4.0, 12.0, SynthKind::kUnexcited, {}, "other_highlight"},
              {18.0, 1.0, SynthKind::kWhistle, {}, "penalty"},
              {18.3, 10.0, SynthKind::kExcited, {}, "penalty"},
              {30.0, 8.0, SynthKind::kUnexcited, {}, "other_highlight"}};
  return s;
}

TEST_F(PipelineTest, ChunkedStreamMatchesOneShot) {
  const RenderedMatch m = RenderMatch(OneSceneScript());
  const ClassifierConfig cc;
  const WindowConfig wc;
  const auto expected = DetectHighlightsInAudio(m.audio, *bank_, cc, wc);
  for (std::size_t chunk : {1u, 777u, 16000u, 1u << 20}) {
    HighlightEngine engine(*bank_, cc, wc);
    std::vector<LabeledFrame> labels;
    engine.set_label_sink([&](const LabeledFrame& f) { labels.push_back(f); });
    const std::span<const double> all(m.audio.samples);
    for (std::size_t i = 0; i < all.size(); i += chunk) {
      engine.Push(all.subspan(i, std::min(chunk, all.size() - i)));
    }
    EXPECT_EQ(engine.Finish(), expected) << chunk;
    EXPECT_EQ(engine.samples_seen(), m.audio.samples.size());
    EXPECT_EQ(labels.size(), engine.frames_classified());
    for (std::size_t i = 1; i < labels.size(); ++i) {
      ASSERT_GT(labels[i].t, labels[i - 1].t);
    }
  }
}

TEST_F(PipelineTest, FindsTheScriptedScene) {
  const RenderedMatch m = RenderMatch(OneSceneScript());
  const auto scenes = DetectHighlightsInAudio(m.audio, *bank_, {}, {});
  ASSERT_EQ(scenes.size(), 1u);
  EXPECT_LE(scenes[0].core_start_s, 19.0);
  EXPECT_GE(scenes[0].core_end_s, 25.0);
  EXPECT_GT(scenes[0].n_whistle + scenes[0].n_excited, 0);
  const MatchResult r = MatchScenes(scenes, m.truth, 1.0);
  EXPECT_EQ(r.tp, 1u);
  EXPECT_EQ(r.fn, 0u);
}

TEST_F(PipelineTest, CrowdAloneHasNoHighlights) {
  const AudioBuffer crowd = GenCrowd(60.0, kCanonicalSampleRate, 77);
  EXPECT_TRUE(DetectHighlightsInAudio(crowd, *bank_, {}, {}).empty());
}

TEST_F(PipelineTest, StreamsWavFiles) {
  TempDir dir;
  const RenderedMatch m = RenderMatch(OneSceneScript());
  WriteWav16(dir.File("m.wav"), m.audio);
  HighlightEngine engine(*bank_, {}, {});
  StreamWavIntoEngine(dir.File("m.wav"), &engine);
  EXPECT_EQ(engine.Finish(), DetectHighlightsInAudio(LoadWav(dir.File("m.wav")),
                                                     *bank_, {}, {}));

  PcmWav(1, 16000, 16, "").WriteTo(dir.File("empty.wav"));
  HighlightEngine empty(*bank_, {}, {});
  EXPECT_HLIGHT_ERROR(StreamWavIntoEngine(dir.File("empty.wav"), &empty),
                      ErrorCode::kTooShort);
  HighlightEngine missing(*bank_, {}, {});
  EXPECT_HLIGHT_ERROR(StreamWavIntoEngine(dir.File("nope.wav"), &missing),
                      ErrorCode::kFileNotFound);
}

TEST_F(PipelineTest, FeatureExtractionFromWavMatchesMemory) {
  TempDir dir;
  const AudioBuffer a = GenCrowd(2.0, 16000, 5);
  WriteWav16(dir.File("c.wav"), a);
  const FeatureConfig fc;
  const FeatureSequence from_file = ExtractFeaturesFromWav(dir.File("c.wav"), fc, 16000);
  EXPECT_EQ(from_file.size(), 198u);
  EXPECT_EQ(from_file.vectors.front().size(), 60u);
  const FeatureSequence direct = ExtractFeatures(LoadWav(dir.File("c.wav")), fc);
  EXPECT_EQ(from_file.vectors, direct.vectors);
  EXPECT_EQ(from_file.timestamps, direct.timestamps);
}

TEST_F(PipelineTest, TrainIsReproducible) {
  std::ostringstream log;
  cli::CmdTrain(SmallConfig(), dir_->File("corpus"), dir_->File("again.json"), log);
  EXPECT_EQ(ReadAll(dir_->File("again.json")), ReadAll(dir_->File("bank.json")));
  EXPECT_NE(log.str().find("final mean log-likelihood"), std::string::npos);
}

TEST_F(PipelineTest, TrainNamesMissingCategory) {
  TempDir dir;
  std::filesystem::copy(dir_->File("corpus"), dir.File("corpus"),
                        std::filesystem::copy_options::recursive);
  std::filesystem::remove_all(dir.File("corpus/whistle"));
  std::ostringstream log;
  try {
    cli::CmdTrain(SmallConfig(), dir.File("corpus"), dir.File("bank.json"), log);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMissingCategory);
    EXPECT_NE(std::string(e.what()).find("whistle"), std::string::npos);
  }
  EXPECT_FALSE(std::filesystem::exists(dir.File("bank.json")));
}

TEST_F(PipelineTest, HighlightsRefusesMismatchedFeatures) {
  TempDir dir;
  WriteWav16(dir.File("a.wav"), GenCrowd(3.0, 16000, 1));
  PipelineConfig c = SmallConfig();
  c.feature.n_mels = 32;
  std::ostringstream log;
  EXPECT_HLIGHT_ERROR(cli::CmdHighlights(c, dir.File("a.wav"), dir_->File("bank.json"),
                                         {dir.File("h.json"), "", "", ""}, log),
                      ErrorCode::kConfigMismatch);
}

TEST_F(PipelineTest, EndToEndThroughCommands) {
  TempDir dir;
  const MatchScript script = OneSceneScript();
  SaveScript(dir.File("script.json"), script);
  std::ostringstream log;
  cli::CmdSynth(dir.File("script.json"), dir.File("out"), log);
  ASSERT_TRUE(std::filesystem::exists(dir.File("out/match.wav")));
  ASSERT_TRUE(std::filesystem::exists(dir.File("out/truth.jsonl")));
  EXPECT_EQ(LoadAnnotations(dir.File("out/truth.jsonl")), RenderMatch(script).truth);

  const cli::HighlightsOutputs outs{dir.File("h.json"), dir.File("h.edl"),
                                    dir.File("labels.jsonl"), dir.File("feat.jsonl")};
  const std::size_t n = cli::CmdHighlights(SmallConfig(), dir.File("out/match.wav"),
                                           dir_->File("bank.json"), outs, log);
  EXPECT_EQ(n, 1u);
  EXPECT_EQ(LoadScenes(dir.File("h.json")).size(), 1u);
  EXPECT_EQ(ReadAll(dir.File("h.edl")), EdlText(LoadScenes(dir.File("h.json"))));
  const auto labels = cli::LoadLabelDump(dir.File("labels.jsonl"));
  EXPECT_EQ(labels.size(), 3998u);

  // Second run gives byte-identical outputs.
  const cli::HighlightsOutputs again{dir.File("h2.json"), dir.File("h2.edl"),
                                     dir.File("labels2.jsonl"), ""};
  cli::CmdHighlights(SmallConfig(), dir.File("out/match.wav"), dir_->File("bank.json"),
                     again, log);
  EXPECT_EQ(ReadAll(dir.File("h.json")), ReadAll(dir.File("h2.json")));
  EXPECT_EQ(ReadAll(dir.File("labels.jsonl")), ReadAll(dir.File("labels2.jsonl")));

  std::ostringstream report;
  cli::CmdEval(dir.File("h.json"), dir.File("out/truth.jsonl"), 1.0,
               dir.File("labels.jsonl"), 0.0, report);
  EXPECT_NE(report.str().find("100.00%"), std::string::npos) << report.str();
}

TEST(CmdEvalTest, PerfectDetectionScoresFull) {
  TempDir dir;
  Annotation truth;
  truth.intervals = {{10.0, 20.0, "try"}, {50.0, 62.0, "penalty"}};
  SaveAnnotations(dir.File("t.jsonl"), truth);
  std::vector<HighlightScene> scenes(2);
  scenes[0] = {10.0, 20.0, 10.0, 20.0, 0.8, 1, 3};
  scenes[1] = {50.0, 62.0, 50.0, 62.0, 0.6, 0, 5};
  SaveScenes(dir.File("d.json"), scenes);
  std::ostringstream out;
  cli::CmdEval(dir.File("d.json"), dir.File("t.jsonl"), 1.0, "", 0.0, out);
  EXPECT_NE(out.str().find("Try recall"), std::string::npos);
  EXPECT_EQ(out.str().find("n/a"), std::string::npos) << out.str();
  EXPECT_EQ(out.str().find(" 0.00%"), std::string::npos) << out.str();
  EXPECT_NE(out.str().find("100.00%"), std::string::npos) << out.str();
}

TEST(PipelineConfigTest, JsonRoundTripIsExact) {
  PipelineConfig c;
  c.window.threshold_pct = 1.0 / 3.0;
  c.window.min_scene_s = 10.0;
  c.classifier.bias_speech = -0.1234567890123;
  c.gmm.rel_tol = 3e-7;
  c.io.bank = "models/bank.json";
  EXPECT_EQ(ConfigFromJson(ConfigToJson(c)), c);
  TempDir dir;
  SaveConfig(dir.File("c.json"), c);
  EXPECT_EQ(LoadConfig(dir.File("c.json")), c);
  EXPECT_EQ(ConfigFromJson(ConfigToJson(PipelineConfig{})), PipelineConfig{});
}

TEST(PipelineConfigTest, RejectsUnknownKeysAndBadValues) {
  nlohmann::json j = ConfigToJson(PipelineConfig{});
  j["window"]["windw_s"] = 4.0;
  EXPECT_HLIGHT_ERROR(ConfigFromJson(j), ErrorCode::kMalformedFile);
  j = ConfigToJson(PipelineConfig{});
  j["extra"] = 1;
  EXPECT_HLIGHT_ERROR(ConfigFromJson(j), ErrorCode::kMalformedFile);
  PipelineConfig c;
  c.window.threshold_pct = 1.5;
  EXPECT_HLIGHT_ERROR(c.Validate(), ErrorCode::kInvalidArgument);
}

TEST(PipelineConfigTest, Overrides) {
  PipelineConfig c;
  ApplyOverride(&c, "window.threshold_pct=0.6");
  ApplyOverride(&c, "window.min_scene_s=12");
  ApplyOverride(&c, "gmm.num_components=8");
  ApplyOverride(&c, "io.bank=out/bank.json");
  ApplyOverride(&c, "classifier.bias_speech=-2.5");
  EXPECT_EQ(c.window.threshold_pct, 0.6);
  EXPECT_EQ(c.window.min_scene_s, 12.0);
  EXPECT_EQ(c.gmm.num_components, 8);
  EXPECT_EQ(c.io.bank, "out/bank.json");
  EXPECT_EQ(c.classifier.bias_speech, -2.5);
  EXPECT_HLIGHT_ERROR(ApplyOverride(&c, "window.nope=1"), ErrorCode::kInvalidArgument);
  EXPECT_HLIGHT_ERROR(ApplyOverride(&c, "threshold_pct"), ErrorCode::kInvalidArgument);
  EXPECT_THROW(ApplyOverride(&c, "gmm.num_components=many"), Error);
  EXPECT_EQ(c.gmm.num_components, 8);
}

}  // namespace
}  // namespace hlight
