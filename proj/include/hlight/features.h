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

#ifndef HLIGHT_FEATURES_H_
#define HLIGHT_FEATURES_H_

#include <deque>
#include <memory>
#include <span>
#include <vector>

#include "hlight/audio_io.h"
#include "json.hpp"

namespace hlight {

// Framing and cepstral parameters. The emitted vector is
// [c1..c_n_ceps | delta c1..delta c_n_ceps], 60 components by default.
struct FeatureConfig {
  double frame_len_ms = 25.0;
  double hop_ms = 10.0;
  int fft_size = 512;
  int n_mels = 40;
  double fmin_hz = 50.0;
  double fmax_hz = 8000.0;
  int n_ceps = 30;
  int delta_span_frames = 2;
  double preemphasis = 0.97;

  int Dimension() const { return 2 * n_ceps; }
  int FrameSamples(int sample_rate) const;
  int HopSamples(int sample_rate) const;
  // Throws kInvalidArgument when any parameter is out of range for the rate.
  void Validate(int sample_rate) const;

  bool operator==(const FeatureConfig&) const = default;
};

inline constexpr double kLogEnergyFloor = 1e-10;

struct FeatureFrame {
  double t = 0.0;  // media time of the frame start, seconds
  std::vector<double> v;
};

struct FeatureSequence {
  std::vector<std::vector<double>> vectors;
  std::vector<double> timestamps;
  FeatureConfig config;
  int sample_rate = kCanonicalSampleRate;

  std::size_t size() const { return vectors.size(); }
};

// floor((n - frame) / hop) + 1 for n >= frame, else 0.
std::size_t FrameCount(std::size_t num_samples, int frame_samples,
                       int hop_samples);

// Pre-emphasis over the whole signal (the first sample is its own
// predecessor), then a Hamming window per frame. Trailing samples that do
// not fill a frame are dropped.
std::vector<std::vector<double>> FrameSignal(const AudioBuffer& buffer,
                                             const FeatureConfig& config);

double HzToMel(double hz);
double MelToHz(double mel);

// Triangular filters over FFT bins 0..fft_size/2, stored row-major.
struct MelFilterbank {
  int n_mels = 0;
  int n_bins = 0;
  std::vector<double> weights;
  std::vector<double> centers_hz;

  double at(int filter, int bin) const {
    return weights[static_cast<std::size_t>(filter) * n_bins + bin];
  }
};

MelFilterbank BuildMelFilterbank(const FeatureConfig& config, int sample_rate);

// Power spectrum |X_k|^2, k = 0..fft_size/2, of a zero-padded frame.
class PowerSpectrum {
 public:
  explicit PowerSpectrum(int fft_size);
  ~PowerSpectrum();
  PowerSpectrum(const PowerSpectrum&) = delete;
  PowerSpectrum& operator=(const PowerSpectrum&) = delete;

  void Compute(std::span<const double> frame, std::vector<double>* power);
  int fft_size() const { return fft_size_; }

 private:
  struct Plan;
  int fft_size_;
  std::unique_ptr<Plan> plan_;
};

// Computes c1..c_n_ceps of one windowed frame; c0 is discarded.
class MfccComputer {
 public:
  MfccComputer(const MelFilterbank& filterbank, const FeatureConfig& config);

  std::vector<double> Compute(std::span<const double> frame);

 private:
  MelFilterbank filterbank_;
  int n_ceps_;
  PowerSpectrum spectrum_;
  std::vector<double> dct_;  // n_ceps x n_mels, rows for c1..c_n
  std::vector<double> power_;
  std::vector<double> log_energy_;
};

std::vector<double> MfccFrame(std::span<const double> frame,
                              const MelFilterbank& filterbank,
                              const FeatureConfig& config);

// Regression deltas with edge frames replicated; same length as the input.
std::vector<std::vector<double>> Delta(
    const std::vector<std::vector<double>>& coeffs, int span);

// Incremental extractor. Output frames are emitted delta_span_frames behind
// the input because the delta needs that much lookahead; Finish() flushes.
class FeatureExtractor {
 public:
  FeatureExtractor(const FeatureConfig& config, int sample_rate);

  void Push(std::span<const double> samples, std::vector<FeatureFrame>* out);
  void Finish(std::vector<FeatureFrame>* out);

  std::size_t frames_emitted() const { return emitted_; }
  const FeatureConfig& config() const { return config_; }

 private:
  void EmitReady(bool finishing, std::vector<FeatureFrame>* out);

  FeatureConfig config_;
  int sample_rate_;
  int frame_samples_;
  int hop_samples_;
  std::vector<double> window_;
  MfccComputer mfcc_;

  double prev_sample_ = 0.0;
  bool started_ = false;
  std::vector<double> pending_;  // pre-emphasized samples from pending_start_
  std::size_t pending_start_ = 0;
  std::size_t next_frame_ = 0;

  std::deque<std::vector<double>> statics_;  // frames statics_first_.. onward
  std::size_t statics_first_ = 0;
  std::size_t emitted_ = 0;
  std::vector<double> frame_buf_;
};

nlohmann::json FeatureConfigToJson(const FeatureConfig& config);
// Missing keys keep their defaults; unknown keys are rejected.
FeatureConfig FeatureConfigFromJson(const nlohmann::json& j);

// Throws kTooShort if the buffer holds less than one frame.
FeatureSequence ExtractFeatures(const AudioBuffer& buffer,
                                const FeatureConfig& config);

}  // namespace hlight

#endif  // HLIGHT_FEATURES_H_
