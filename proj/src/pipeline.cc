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

#include "hlight/error.h"

namespace hlight {
namespace {

constexpr std::size_t kReadBlockFrames = 16384;

double HopSeconds(const ModelBank& bank) {
  return static_cast<double>(bank.feature_config.HopSamples(bank.sample_rate)) /
         bank.sample_rate;
}

std::vector<double> MixToMono(const std::vector<double>& interleaved, int channels) {
  if (channels == 1) return interleaved;
  std::vector<double> mono(interleaved.size() / channels);
  for (std::size_t i = 0; i < mono.size(); ++i) {
    double s = 0.0;
    for (int c = 0; c < channels; ++c) s += interleaved[i * channels + c];
    mono[i] = s / channels;
  }
  return mono;
}

// Pulls blocks from a WAV file, downmixed and resampled to `rate`.
template <typename Consumer>
std::size_t StreamWav(const std::string& path, int rate, Consumer&& consume) {
  WavReader reader(path);
  const WavInfo& info = reader.info();
  StreamingResampler resampler(info.sample_rate, rate);
  std::vector<double> resampled;
  std::size_t total = 0;
  while (true) {
    const std::vector<double> block = reader.Read(kReadBlockFrames);
    if (block.empty()) break;
    const std::vector<double> mono = MixToMono(block, info.channels);
    total += mono.size();
    resampled.clear();
    resampler.Push(mono, &resampled);
    if (!resampled.empty()) consume(std::span<const double>(resampled));
  }
  if (total == 0) {
    throw Error(ErrorCode::kTooShort, "no audio samples in " + path);
  }
  resampled.clear();
  resampler.Finish(&resampled);
  if (!resampled.empty()) consume(std::span<const double>(resampled));
  return total;
}

}  // namespace

HighlightEngine::HighlightEngine(const ModelBank& bank,
                                 const ClassifierConfig& classifier,
                                 const WindowConfig& window)
    : sample_rate_(bank.sample_rate),
      window_(window),
      extractor_(bank.feature_config, bank.sample_rate),
      classifier_(bank, classifier),
      smoother_(classifier.smooth_frames),
      segmenter_(WindowFrames(window.window_s, HopSeconds(bank)),
                 window.threshold_pct, HopSeconds(bank)) {
  window.Validate();
}

void HighlightEngine::Drain() {
  for (const FeatureFrame& f : features_) {
    if (feature_sink_) feature_sink_(f);
    const FrameDecision d = classifier_.Classify(f.v);
    raw_.push_back({f.t, d.label, d.stage1_margin, d.stage2_margin});
    ++frames_classified_;
  }
  features_.clear();
  for (const LabeledFrame& r : raw_) smoother_.Push(r, &smoothed_);
  raw_.clear();
  for (const LabeledFrame& s : smoothed_) {
    if (label_sink_) label_sink_(s);
    segmenter_.Push(s, &core_scenes_);
  }
  smoothed_.clear();
}

void HighlightEngine::Push(std::span<const double> samples) {
  if (finished_) throw Error(ErrorCode::kInvalidArgument, "engine already finished");
  samples_seen_ += samples.size();
  extractor_.Push(samples, &features_);
  Drain();
}

std::vector<HighlightScene> HighlightEngine::Finish() {
  if (finished_) throw Error(ErrorCode::kInvalidArgument, "engine already finished");
  finished_ = true;
  extractor_.Finish(&features_);
  Drain();
  smoother_.Finish(&smoothed_);
  for (const LabeledFrame& s : smoothed_) {
    if (label_sink_) label_sink_(s);
    segmenter_.Push(s, &core_scenes_);
  }
  smoothed_.clear();
  segmenter_.Finish(&core_scenes_);
  const double duration = static_cast<double>(samples_seen_) / sample_rate_;
  const auto kept =
      FilterSceneDurations(core_scenes_, window_.min_scene_s, window_.max_scene_s);
  return ApplyMargins(kept, window_.margin_s, duration);
}

std::vector<HighlightScene> DetectHighlightsInAudio(
    const AudioBuffer& buffer, const ModelBank& bank,
    const ClassifierConfig& classifier, const WindowConfig& window) {
  ValidateAudioBuffer(buffer);
  AudioBuffer mono = DownmixMono(buffer);
  if (mono.sample_rate != bank.sample_rate) mono = Resample(mono, bank.sample_rate);
  HighlightEngine engine(bank, classifier, window);
  engine.Push(mono.samples);
  return engine.Finish();
}

void StreamWavIntoEngine(const std::string& path, HighlightEngine* engine) {
  StreamWav(path, engine->sample_rate(),
            [engine](std::span<const double> block) { engine->Push(block); });
}

FeatureSequence ExtractFeaturesFromWav(const std::string& path,
                                       const FeatureConfig& config,
                                       int sample_rate) {
  FeatureExtractor extractor(config, sample_rate);
  std::vector<FeatureFrame> frames;
  StreamWav(path, sample_rate,
            [&](std::span<const double> block) { extractor.Push(block, &frames); });
  extractor.Finish(&frames);
  FeatureSequence seq;
  seq.config = config;
  seq.sample_rate = sample_rate;
  seq.vectors.reserve(frames.size());
  seq.timestamps.reserve(frames.size());
  for (auto& f : frames) {
    seq.timestamps.push_back(f.t);
    seq.vectors.push_back(std::move(f.v));
  }
  return seq;
}

}  // namespace hlight
