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

#ifndef HLIGHT_CLASSIFIER_H_
#define HLIGHT_CLASSIFIER_H_

#include <cstddef>
#include <deque>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hlight/features.h"
#include "hlight/gmm.h"
#include "json.hpp"

namespace hlight {

enum class EventLabel {
  kExcitedSpeech,
  kUnexcitedSpeech,
  kWhistle,
  kOthers,
};

inline constexpr EventLabel kAllLabels[] = {
    EventLabel::kExcitedSpeech, EventLabel::kUnexcitedSpeech,
    EventLabel::kWhistle, EventLabel::kOthers};

// "excited_speech", "unexcited_speech", "whistle", "others".
std::string_view LabelName(EventLabel label);
std::optional<EventLabel> ParseLabel(std::string_view name);

// Whistle and excited speech are the events that drive highlight detection.
inline bool IsKeyEvent(EventLabel label) {
  return label == EventLabel::kExcitedSpeech || label == EventLabel::kWhistle;
}

// The five trained models plus the feature configuration they were trained
// on. There is no dedicated non-speech model.
struct ModelBank {
  FeatureConfig feature_config;
  int sample_rate = kCanonicalSampleRate;
  GmmModel speech;
  GmmModel excited;
  GmmModel unexcited;
  GmmModel whistle;
  GmmModel others;

  // Every model valid and of dimension feature_config.Dimension().
  void Validate() const;
};

inline constexpr int kBankFormatVersion = 1;
inline constexpr char kBankFormatName[] = "hlight-model-bank";

nlohmann::json BankToJson(const ModelBank& bank);
ModelBank BankFromJson(const nlohmann::json& j);
void SaveBank(const std::string& path, const ModelBank& bank);
ModelBank LoadBank(const std::string& path);

struct ClassifierConfig {
  // Added to the speech log-likelihood in stage 1; positive values favor the
  // speech branch (and so excited speech).
  double bias_speech = 0.0;
  // Centered majority-vote window; values <= 1 disable smoothing.
  int smooth_frames = 11;

  bool operator==(const ClassifierConfig&) const = default;
};

struct FrameDecision {
  EventLabel label = EventLabel::kOthers;
  // log p(speech) - max(log p(whistle), log p(others)).
  double stage1_margin = 0.0;
  // Key-event model minus its stage-2 rival: excited - unexcited for speech
  // frames, whistle - others otherwise.
  double stage2_margin = 0.0;
};

struct LabeledFrame {
  double t = 0.0;
  EventLabel label = EventLabel::kOthers;
  double stage1_margin = 0.0;
  double stage2_margin = 0.0;
};

// Two-stage decision: speech vs non-speech, then excited/unexcited or
// whistle/others. Exact ties go to the key event.
class BankClassifier {
 public:
  BankClassifier(const ModelBank& bank, const ClassifierConfig& config);

  FrameDecision Classify(std::span<const double> c) const;
  int dim() const { return dim_; }

 private:
  int dim_;
  double bias_speech_;
  GmmEvaluator speech_;
  GmmEvaluator excited_;
  GmmEvaluator unexcited_;
  GmmEvaluator whistle_;
  GmmEvaluator others_;
};

FrameDecision ClassifyFrame(const ModelBank& bank, std::span<const double> c,
                            double bias_speech = 0.0);

// Majority vote over the centered window [i - w/2, i + w/2] truncated at the
// sequence ends. A tie for the most votes keeps the original label.
std::vector<EventLabel> SmoothLabels(std::span<const EventLabel> labels,
                                     int smooth_frames);

// Streaming form of SmoothLabels; output lags the input by w/2 frames.
class LabelSmoother {
 public:
  explicit LabelSmoother(int smooth_frames);

  void Push(const LabeledFrame& frame, std::vector<LabeledFrame>* out);
  void Finish(std::vector<LabeledFrame>* out);

 private:
  void EmitOne(std::vector<LabeledFrame>* out);

  int half_;
  std::deque<LabeledFrame> buffer_;  // frames first_index_ onward
  std::size_t first_index_ = 0;
  std::size_t next_emit_ = 0;
  std::size_t received_ = 0;
};

std::vector<LabeledFrame> ClassifySequence(const ModelBank& bank,
                                           const FeatureSequence& features,
                                           const ClassifierConfig& config);

using LabeledCorpus = std::map<EventLabel, std::vector<FeatureSequence>>;

struct BankTrainingReport {
  ModelBank bank;
  // Keyed by model role: speech, excited, unexcited, whistle, others.
  std::map<std::string, double> final_mean_log_likelihood;
  std::map<std::string, std::size_t> training_vectors;
};

// Speech is trained on excited + unexcited frames; the other four models on
// their own category. Each model gets its own seed derived from
// options.seed. Throws kMissingCategory naming the empty category.
BankTrainingReport TrainBank(const LabeledCorpus& corpus,
                             const EmOptions& options);

nlohmann::json LabeledFrameToJson(const LabeledFrame& frame);

}  // namespace hlight

#endif  // HLIGHT_CLASSIFIER_H_
