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

#ifndef HLIGHT_PIPELINE_H_
#define HLIGHT_PIPELINE_H_

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "hlight/audio_io.h"
#include "hlight/classifier.h"
#include "hlight/features.h"
#include "hlight/segmenter.h"

namespace hlight {

// Streaming highlight detector: features -> two-stage classification ->
// label smoothing -> decision window. Input is mono audio at the bank's
// sample rate, pushed in blocks of any size. State is bounded by the
// feature delta lookahead, the smoothing window and one decision window.
class HighlightEngine {
 public:
  HighlightEngine(const ModelBank& bank, const ClassifierConfig& classifier,
                  const WindowConfig& window);

  void Push(std::span<const double> samples);
  // Flushes the stream and returns the scenes after duration filtering and
  // margin padding. Call once.
  std::vector<HighlightScene> Finish();

  // Optional observers, called in stream order.
  void set_feature_sink(std::function<void(const FeatureFrame&)> sink) {
    feature_sink_ = std::move(sink);
  }
  void set_label_sink(std::function<void(const LabeledFrame&)> sink) {
    label_sink_ = std::move(sink);
  }

  std::size_t samples_seen() const { return samples_seen_; }
  std::size_t frames_classified() const { return frames_classified_; }
  int sample_rate() const { return sample_rate_; }

 private:
  void Drain();

  int sample_rate_;
  WindowConfig window_;
  FeatureExtractor extractor_;
  BankClassifier classifier_;
  LabelSmoother smoother_;
  OnlineSegmenter segmenter_;
  std::function<void(const FeatureFrame&)> feature_sink_;
  std::function<void(const LabeledFrame&)> label_sink_;

  std::vector<FeatureFrame> features_;
  std::vector<LabeledFrame> raw_;
  std::vector<LabeledFrame> smoothed_;
  std::vector<HighlightScene> core_scenes_;
  std::size_t samples_seen_ = 0;
  std::size_t frames_classified_ = 0;
  bool finished_ = false;
};

// Runs a whole in-memory buffer (any rate, any supported layout) through
// the engine.
std::vector<HighlightScene> DetectHighlightsInAudio(
    const AudioBuffer& buffer, const ModelBank& bank,
    const ClassifierConfig& classifier, const WindowConfig& window);

// Reads a WAV file block by block, downmixes, resamples to the bank rate
// and feeds `engine`. Throws kTooShort for a file without samples.
void StreamWavIntoEngine(const std::string& path, HighlightEngine* engine);

// Streams a WAV file to features at the given rate, for training.
FeatureSequence ExtractFeaturesFromWav(const std::string& path,
                                       const FeatureConfig& config,
                                       int sample_rate);

}  // namespace hlight

#endif  // HLIGHT_PIPELINE_H_
