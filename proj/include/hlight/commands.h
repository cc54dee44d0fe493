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

#ifndef HLIGHT_COMMANDS_H_
#define HLIGHT_COMMANDS_H_

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>

#include "hlight/pipeline_config.h"
#include "hlight/synthgen.h"

namespace hlight::cli {

// Trains the five-model bank from corpus_dir/<category>/*.wav, one directory
// per classifier category, and writes it to out_path. Prints the final mean
// log-likelihood of every model.
void CmdTrain(const PipelineConfig& config, const std::string& corpus_dir,
              const std::string& out_path, std::ostream& log);

struct HighlightsOutputs {
  std::string highlights;  // required
  std::string edl;         // optional
  std::string labels;      // optional JSONL label dump
  std::string features;    // optional JSONL feature dump
};

// Streams a WAV file through the engine and writes the scene list. Refuses
// to run when the bank was trained with a different feature configuration.
// Returns the number of scenes.
std::size_t CmdHighlights(const PipelineConfig& config,
                          const std::string& audio_path,
                          const std::string& bank_path,
                          const HighlightsOutputs& outputs, std::ostream& log);

// Scene-level report of detected vs annotated highlights, plus event rows
// when a label dump is supplied. Events use their own overlap threshold since
// a whistle may be shorter than the scene threshold.
void CmdEval(const std::string& detected_path, const std::string& truth_path,
             double overlap_s, const std::string& labels_path,
             double event_overlap_s, std::ostream& out);

// Renders a match script into out_dir/match.wav and out_dir/truth.jsonl.
void CmdSynth(const std::string& script_path, const std::string& out_dir,
              std::ostream& log);

// Writes out_dir/script.json for a demo match.
void CmdSynthDemoScript(const std::string& out_dir, double total_s,
                        int num_scenes, std::uint64_t seed, double snr_db,
                        std::ostream& log);

// Writes clips_per_category clips per classifier category into
// out_dir/<category>/, plus out_dir/overlap/ whistle-over-speech clips.
void CmdSynthCorpus(const std::string& out_dir, int clips_per_category,
                    double clip_s, std::uint64_t seed, double snr_db,
                    std::ostream& log);

std::vector<LabeledFrame> LoadLabelDump(const std::string& path);

}  // namespace hlight::cli

#endif  // HLIGHT_COMMANDS_H_
