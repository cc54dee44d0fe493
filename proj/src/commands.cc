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

#include "hlight/commands.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>

#include "hlight/error.h"
#include "hlight/evalkit.h"
#include "hlight/pipeline.h"
#include "spdlog/spdlog.h"

namespace hlight::cli {
namespace fs = std::filesystem;
namespace {

std::vector<fs::path> WavFiles(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), ::tolower);
    if (ext == ".wav") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

std::ofstream OpenOut(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot open " + path + " for writing");
  return out;
}

void EnsureDir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + dir + ": " + ec.message());
}

}  // namespace

void CmdTrain(const PipelineConfig& config, const std::string& corpus_dir,
              const std::string& out_path, std::ostream& log) {
  config.Validate();
  if (!fs::is_directory(corpus_dir)) {
    throw Error(ErrorCode::kFileNotFound, "corpus directory " + corpus_dir);
  }
  LabeledCorpus corpus;
  for (EventLabel label : kAllLabels) {
    const fs::path dir = fs::path(corpus_dir) / std::string(LabelName(label));
    if (!fs::is_directory(dir)) {
      throw Error(ErrorCode::kMissingCategory,
                  "missing category directory '" + std::string(LabelName(label)) +
                      "' (" + dir.string() + ")");
    }
    const auto files = WavFiles(dir);
    if (files.empty()) {
      throw Error(ErrorCode::kMissingCategory,
                  "no WAV files for category '" + std::string(LabelName(label)) + "'");
    }
    for (const auto& file : files) {
      spdlog::debug("features: {}", file.string());
      corpus[label].push_back(
          ExtractFeaturesFromWav(file.string(), config.feature, kCanonicalSampleRate));
    }
  }
  const BankTrainingReport report = TrainBank(corpus, config.gmm);
  SaveBank(out_path, report.bank);
  for (const auto& [role, ll] : report.final_mean_log_likelihood) {
    log << "model " << role << ": final mean log-likelihood "
        << std::setprecision(6) << std::fixed << ll << " over "
        << report.training_vectors.at(role) << " vectors\n";
  }
  log << "wrote " << out_path << "\n";
}

std::size_t CmdHighlights(const PipelineConfig& config,
                          const std::string& audio_path,
                          const std::string& bank_path,
                          const HighlightsOutputs& outputs, std::ostream& log) {
  config.Validate();
  const ModelBank bank = LoadBank(bank_path);
  if (!(bank.feature_config == config.feature)) {
    throw Error(ErrorCode::kConfigMismatch,
                "bank " + bank_path +
                    " was trained with a different feature configuration: bank " +
                    FeatureConfigToJson(bank.feature_config).dump() + " vs config " +
                    FeatureConfigToJson(config.feature).dump());
  }
  if (outputs.highlights.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "no output path for highlights");
  }

  HighlightEngine engine(bank, config.classifier, config.window);
  std::ofstream labels_out;
  std::ofstream features_out;
  if (!outputs.labels.empty()) {
    labels_out = OpenOut(outputs.labels);
    engine.set_label_sink([&labels_out](const LabeledFrame& f) {
      labels_out << LabeledFrameToJson(f).dump() << "\n";
    });
  }
  if (!outputs.features.empty()) {
    features_out = OpenOut(outputs.features);
    engine.set_feature_sink([&features_out](const FeatureFrame& f) {
      features_out << nlohmann::json{{"t", f.t}, {"v", f.v}}.dump() << "\n";
    });
  }
  StreamWavIntoEngine(audio_path, &engine);
  const std::vector<HighlightScene> scenes = engine.Finish();

  SaveScenes(outputs.highlights, scenes);
  if (!outputs.edl.empty()) {
    std::ofstream edl = OpenOut(outputs.edl);
    edl << EdlText(scenes);
  }
  log << scenes.size() << " scene(s) in "
      << std::setprecision(1) << std::fixed
      << static_cast<double>(engine.samples_seen()) / engine.sample_rate()
      << " s of audio (" << engine.frames_classified() << " frames)\n";
  return scenes.size();
}

std::vector<LabeledFrame> LoadLabelDump(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kFileNotFound, path);
  std::vector<LabeledFrame> frames;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      LabeledFrame f;
      f.t = j.at("t").get<double>();
      const auto label = ParseLabel(j.at("label").get<std::string>());
      if (!label) throw Error(ErrorCode::kMalformedFile, "unknown label");
      f.label = *label;
      f.stage1_margin = j.value("m1", 0.0);
      f.stage2_margin = j.value("m2", 0.0);
      frames.push_back(f);
    } catch (const std::exception& e) {
      throw Error(ErrorCode::kMalformedFile,
                  path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return frames;
}

void CmdEval(const std::string& detected_path, const std::string& truth_path,
             double overlap_s, const std::string& labels_path,
             double event_overlap_s, std::ostream& out) {
  const auto scenes = LoadScenes(detected_path);
  const Annotation truth = LoadAnnotations(truth_path);
  const MatchResult scene_result = MatchScenes(scenes, truth, overlap_s);
  std::map<std::string, MatchResult> events;
  if (!labels_path.empty()) {
    const auto frames = LoadLabelDump(labels_path);
    if (frames.size() >= 2) {
      const double hop = frames[1].t - frames[0].t;
      events = EvaluateEvents(frames, truth, hop, event_overlap_s);
    }
  }
  out << FormatMetricsReport(events, scene_result);
}

void CmdSynth(const std::string& script_path, const std::string& out_dir,
              std::ostream& log) {
  const MatchScript script = LoadScript(script_path);
  const RenderedMatch match = RenderMatch(script);
  EnsureDir(out_dir);
  const std::string wav = (fs::path(out_dir) / "match.wav").string();
  const std::string truth = (fs::path(out_dir) / "truth.jsonl").string();
  WriteWav16(wav, match.audio);
  SaveAnnotations(truth, match.truth);
  log << "wrote " << wav << " (" << std::setprecision(1) << std::fixed
      << match.audio.duration_s() << " s) and " << truth << " ("
      << match.truth.intervals.size() << " intervals)\n";
}

void CmdSynthDemoScript(const std::string& out_dir, double total_s,
                        int num_scenes, std::uint64_t seed, double snr_db,
                        std::ostream& log) {
  const MatchScript script = MakeDemoMatchScript(total_s, num_scenes, seed, snr_db);
  EnsureDir(out_dir);
  const std::string path = (fs::path(out_dir) / "script.json").string();
  SaveScript(path, script);
  log << "wrote " << path << " (" << script.events.size() << " events)\n";
}

void CmdSynthCorpus(const std::string& out_dir, int clips_per_category,
                    double clip_s, std::uint64_t seed, double snr_db,
                    std::ostream& log) {
  if (clips_per_category < 1) {
    throw Error(ErrorCode::kInvalidArgument, "need at least one clip per category");
  }
  std::uint64_t clip_seed = seed;
  auto write = [&](const std::string& category, const AudioBuffer& audio, int i) {
    const fs::path dir = fs::path(out_dir) / category;
    EnsureDir(dir.string());
    std::ostringstream name;
    name << "clip_" << std::setw(3) << std::setfill('0') << i << ".wav";
    WriteWav16((dir / name.str()).string(), audio);
  };
  for (EventLabel label : kAllLabels) {
    for (int i = 0; i < clips_per_category; ++i) {
      write(std::string(LabelName(label)),
            RenderCategoryClip(label, clip_s, ++clip_seed, snr_db), i);
    }
  }
  for (int i = 0; i < clips_per_category; ++i) {
    write("overlap", RenderOverlapClip(clip_s, ++clip_seed, snr_db), i);
  }
  log << "wrote " << 5 * clips_per_category << " clips under " << out_dir << "\n";
}

}  // namespace hlight::cli
