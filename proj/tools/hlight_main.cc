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

// Command-line front end: train, highlights, eval, synth.

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hlight/commands.h"
#include "hlight/error.h"
#include "hlight/pipeline_config.h"
#include "spdlog/spdlog.h"

namespace {

constexpr char kLogLevelEnv[] = "HLIGHT_LOG_LEVEL";

void ConfigureLogging() {
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(spdlog::level::warn);
  if (const char* level = std::getenv(kLogLevelEnv)) {
    spdlog::set_level(spdlog::level::from_str(level));
  }
}

hlight::PipelineConfig ResolveConfig(const std::string& path,
                                     const std::vector<std::string>& overrides) {
  hlight::PipelineConfig config =
      path.empty() ? hlight::PipelineConfig{} : hlight::LoadConfig(path);
  for (const auto& o : overrides) hlight::ApplyOverride(&config, o);
  config.Validate();
  return config;
}

std::string Pick(const std::string& flag, const std::string& from_config,
                 const char* what) {
  if (!flag.empty()) return flag;
  if (!from_config.empty()) return from_config;
  throw hlight::Error(hlight::ErrorCode::kInvalidArgument,
                      std::string("no ") + what + " given");
}

}  // namespace

int main(int argc, char** argv) {
  ConfigureLogging();
  CLI::App app{"Audio-driven sports highlight detection"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  auto add_config = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "Pipeline config (JSON)");
    cmd->add_option("--set", overrides, "Override a config value, e.g. window.window_s=3");
  };

  auto* train = app.add_subcommand("train", "Train the model bank from a labeled corpus");
  std::string corpus_dir;
  std::string train_out;
  train->add_option("--corpus", corpus_dir, "Directory with one subdirectory per category");
  train->add_option("--out", train_out, "Output model bank");
  add_config(train);

  auto* highlights = app.add_subcommand("highlights", "Detect highlight scenes in a WAV file");
  std::string audio_path;
  std::string bank_path;
  hlight::cli::HighlightsOutputs outputs;
  highlights->add_option("--audio", audio_path, "Input WAV");
  highlights->add_option("--bank", bank_path, "Model bank");
  highlights->add_option("--out", outputs.highlights, "Output scene list (JSON)");
  highlights->add_option("--edl", outputs.edl, "Also write an edit decision list");
  highlights->add_option("--labels", outputs.labels, "Dump smoothed frame labels (JSONL)");
  highlights->add_option("--features", outputs.features, "Dump feature vectors (JSONL)");
  add_config(highlights);

  auto* eval = app.add_subcommand("eval", "Score detected scenes against annotations");
  std::string detected_path;
  std::string truth_path;
  std::string eval_labels;
  double overlap_s = 1.0;
  double event_overlap_s = 0.0;
  eval->add_option("--detected", detected_path, "Scene list from 'highlights'")->required();
  eval->add_option("--truth", truth_path, "Annotation file (JSONL)")->required();
  eval->add_option("--overlap-s", overlap_s, "Minimum overlap for a match, seconds")
      ->check(CLI::NonNegativeNumber);
  eval->add_option("--labels", eval_labels, "Label dump for event-level rows");
  eval->add_option("--event-overlap-s", event_overlap_s,
                   "Minimum overlap for an event-level match, seconds (0: any overlap)")
      ->check(CLI::NonNegativeNumber);

  auto* synth = app.add_subcommand("synth", "Render synthetic audio with annotations");
  std::string script_path;
  std::string synth_out;
  bool demo = false;
  double demo_total_s = 600.0;
  int demo_scenes = 8;
  int corpus_clips = 0;
  double clip_s = 20.0;
  std::uint64_t seed = 1;
  double snr_db = hlight::kDefaultSnrDb;
  synth->add_option("--script", script_path, "Match script (JSON)");
  synth->add_option("--out", synth_out, "Output directory")->required();
  synth->add_flag("--demo-script", demo, "Write a demo match script instead of rendering");
  synth->add_option("--total-s", demo_total_s, "Demo match length, seconds");
  synth->add_option("--scenes", demo_scenes, "Demo key-event scenes");
  synth->add_option("--corpus-clips", corpus_clips,
                    "Write a training corpus with this many clips per category");
  synth->add_option("--clip-s", clip_s, "Corpus clip length, seconds");
  synth->add_option("--seed", seed, "Random seed");
  synth->add_option("--snr-db", snr_db, "Event level over the crowd bed, dB");

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) {
      const auto config = ResolveConfig(config_path, overrides);
      hlight::cli::CmdTrain(config, Pick(corpus_dir, config.io.corpus_dir, "--corpus"),
                            Pick(train_out, config.io.bank, "--out"), std::cout);
    } else if (highlights->parsed()) {
      const auto config = ResolveConfig(config_path, overrides);
      outputs.highlights = Pick(outputs.highlights, config.io.highlights, "--out");
      if (outputs.edl.empty()) outputs.edl = config.io.edl;
      if (outputs.labels.empty()) outputs.labels = config.io.labels;
      if (outputs.features.empty()) outputs.features = config.io.features;
      hlight::cli::CmdHighlights(config, Pick(audio_path, config.io.audio, "--audio"),
                                 Pick(bank_path, config.io.bank, "--bank"), outputs,
                                 std::cout);
    } else if (eval->parsed()) {
      hlight::cli::CmdEval(detected_path, truth_path, overlap_s, eval_labels,
                           event_overlap_s, std::cout);
    } else if (synth->parsed()) {
      if (demo) {
        hlight::cli::CmdSynthDemoScript(synth_out, demo_total_s, demo_scenes, seed,
                                        snr_db, std::cout);
      } else if (corpus_clips > 0) {
        hlight::cli::CmdSynthCorpus(synth_out, corpus_clips, clip_s, seed, snr_db,
                                    std::cout);
      } else {
        if (script_path.empty()) {
          throw hlight::Error(hlight::ErrorCode::kInvalidArgument,
                              "synth needs --script, --demo-script or --corpus-clips");
        }
        hlight::cli::CmdSynth(script_path, synth_out, std::cout);
      }
    }
  } catch (const hlight::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
