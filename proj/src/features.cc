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

#include "hlight/features.h"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <string>

#include "hlight/error.h"

namespace hlight {
namespace {

// The FFTW planner is not thread-safe; execution on distinct plans is.
std::mutex& PlannerMutex() {
  static std::mutex mu;
  return mu;
}

bool IsPowerOfTwo(int n) { return n > 0 && (n & (n - 1)) == 0; }

std::vector<double> HammingWindow(int n) {
  std::vector<double> w(static_cast<std::size_t>(n));
  if (n == 1) {
    w[0] = 1.0;
    return w;
  }
  for (int i = 0; i < n; ++i) {
    w[i] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * i / (n - 1));
  }
  return w;
}

}  // namespace

int FeatureConfig::FrameSamples(int sample_rate) const {
  return static_cast<int>(std::lround(frame_len_ms * sample_rate / 1000.0));
}

int FeatureConfig::HopSamples(int sample_rate) const {
  return static_cast<int>(std::lround(hop_ms * sample_rate / 1000.0));
}

void FeatureConfig::Validate(int sample_rate) const {
  auto fail = [](const std::string& what) {
    throw Error(ErrorCode::kInvalidArgument, "feature config: " + what);
  };
  if (sample_rate <= 0) fail("sample rate must be positive");
  if (!(frame_len_ms > 0.0)) fail("frame_len_ms must be positive");
  if (!(hop_ms > 0.0) || hop_ms > frame_len_ms) {
    fail("hop_ms must be in (0, frame_len_ms]");
  }
  if (FrameSamples(sample_rate) < 1 || HopSamples(sample_rate) < 1) {
    fail("frame or hop shorter than one sample");
  }
  if (!IsPowerOfTwo(fft_size) || fft_size < FrameSamples(sample_rate)) {
    fail("fft_size must be a power of two >= frame samples");
  }
  if (n_mels < 2) fail("n_mels must be >= 2");
  if (!(fmin_hz >= 0.0) || !(fmin_hz < fmax_hz) ||
      fmax_hz > sample_rate / 2.0) {
    fail("need 0 <= fmin < fmax <= sample_rate/2");
  }
  if (n_ceps < 1 || n_ceps > n_mels - 1) fail("n_ceps must be in [1, n_mels-1]");
  if (delta_span_frames < 1) fail("delta_span_frames must be >= 1");
  if (!(preemphasis >= 0.0) || !(preemphasis < 1.0)) {
    fail("preemphasis must be in [0, 1)");
  }
}

std::size_t FrameCount(std::size_t num_samples, int frame_samples,
                       int hop_samples) {
  const auto frame = static_cast<std::size_t>(frame_samples);
  if (num_samples < frame) return 0;
  return (num_samples - frame) / static_cast<std::size_t>(hop_samples) + 1;
}

std::vector<std::vector<double>> FrameSignal(const AudioBuffer& buffer,
                                             const FeatureConfig& config) {
  if (buffer.channels != 1) {
    throw Error(ErrorCode::kUnsupportedLayout, "framing needs mono audio");
  }
  config.Validate(buffer.sample_rate);
  const int frame = config.FrameSamples(buffer.sample_rate);
  const int hop = config.HopSamples(buffer.sample_rate);
  const std::size_t count = FrameCount(buffer.samples.size(), frame, hop);
  if (count == 0) {
    throw Error(ErrorCode::kTooShort,
                std::to_string(buffer.samples.size()) +
                    " samples is less than one frame of " +
                    std::to_string(frame));
  }
  const auto& x = buffer.samples;
  const std::vector<double> window = HammingWindow(frame);
  std::vector<std::vector<double>> frames(count, std::vector<double>(frame));
  for (std::size_t f = 0; f < count; ++f) {
    const std::size_t start = f * static_cast<std::size_t>(hop);
    for (int i = 0; i < frame; ++i) {
      const std::size_t n = start + i;
      const double prev = n == 0 ? x[0] : x[n - 1];
      frames[f][i] = (x[n] - config.preemphasis * prev) * window[i];
    }
  }
  return frames;
}

double HzToMel(double hz) {
  if (!(hz >= 0.0)) {
    throw Error(ErrorCode::kDomain, "negative frequency " + std::to_string(hz));
  }
  return 2595.0 * std::log10(1.0 + hz / 700.0);
}

double MelToHz(double mel) {
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

MelFilterbank BuildMelFilterbank(const FeatureConfig& config, int sample_rate) {
  config.Validate(sample_rate);
  MelFilterbank fb;
  fb.n_mels = config.n_mels;
  fb.n_bins = config.fft_size / 2 + 1;
  fb.weights.assign(static_cast<std::size_t>(fb.n_mels) * fb.n_bins, 0.0);

  const double mel_lo = HzToMel(config.fmin_hz);
  const double mel_hi = HzToMel(config.fmax_hz);
  const double step = (mel_hi - mel_lo) / (config.n_mels + 1);
  std::vector<double> edges(static_cast<std::size_t>(config.n_mels) + 2);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    edges[i] = MelToHz(mel_lo + step * static_cast<double>(i));
  }
  fb.centers_hz.assign(edges.begin() + 1, edges.end() - 1);

  const double bin_hz = static_cast<double>(sample_rate) / config.fft_size;
  for (int m = 0; m < fb.n_mels; ++m) {
    const double left = edges[m];
    const double center = edges[m + 1];
    const double right = edges[m + 2];
    for (int k = 0; k < fb.n_bins; ++k) {
      const double f = k * bin_hz;
      const double rise = (f - left) / (center - left);
      const double fall = (right - f) / (right - center);
      fb.weights[static_cast<std::size_t>(m) * fb.n_bins + k] =
          std::max(0.0, std::min(rise, fall));
    }
  }
  return fb;
}

struct PowerSpectrum::Plan {
  double* in = nullptr;
  fftw_complex* out = nullptr;
  fftw_plan plan = nullptr;
};

PowerSpectrum::PowerSpectrum(int fft_size)
    : fft_size_(fft_size), plan_(std::make_unique<Plan>()) {
  if (!IsPowerOfTwo(fft_size)) {
    throw Error(ErrorCode::kInvalidArgument, "fft size must be a power of two");
  }
  std::lock_guard<std::mutex> lock(PlannerMutex());
  plan_->in = fftw_alloc_real(static_cast<std::size_t>(fft_size));
  plan_->out = fftw_alloc_complex(static_cast<std::size_t>(fft_size / 2 + 1));
  plan_->plan = fftw_plan_dft_r2c_1d(fft_size, plan_->in, plan_->out,
                                     FFTW_ESTIMATE);
}

PowerSpectrum::~PowerSpectrum() {
  std::lock_guard<std::mutex> lock(PlannerMutex());
  fftw_destroy_plan(plan_->plan);
  fftw_free(plan_->in);
  fftw_free(plan_->out);
}

void PowerSpectrum::Compute(std::span<const double> frame,
                            std::vector<double>* power) {
  if (static_cast<int>(frame.size()) > fft_size_) {
    throw Error(ErrorCode::kInvalidArgument,
                "frame of " + std::to_string(frame.size()) +
                    " samples exceeds fft size " + std::to_string(fft_size_));
  }
  std::copy(frame.begin(), frame.end(), plan_->in);
  std::fill(plan_->in + frame.size(), plan_->in + fft_size_, 0.0);
  fftw_execute(plan_->plan);
  const int bins = fft_size_ / 2 + 1;
  power->resize(static_cast<std::size_t>(bins));
  for (int k = 0; k < bins; ++k) {
    const double re = plan_->out[k][0];
    const double im = plan_->out[k][1];
    (*power)[k] = re * re + im * im;
  }
}

MfccComputer::MfccComputer(const MelFilterbank& filterbank,
                           const FeatureConfig& config)
    : filterbank_(filterbank),
      n_ceps_(config.n_ceps),
      spectrum_(config.fft_size) {
  const int n = filterbank_.n_mels;
  if (filterbank_.n_bins != config.fft_size / 2 + 1 || n_ceps_ > n - 1) {
    throw Error(ErrorCode::kInvalidArgument,
                "filterbank does not match the feature config");
  }
  // Orthonormal DCT-II rows 1..n_ceps.
  dct_.resize(static_cast<std::size_t>(n_ceps_) * n);
  const double norm = std::sqrt(2.0 / n);
  for (int j = 1; j <= n_ceps_; ++j) {
    for (int i = 0; i < n; ++i) {
      dct_[static_cast<std::size_t>(j - 1) * n + i] =
          norm * std::cos(std::numbers::pi * j * (i + 0.5) / n);
    }
  }
  log_energy_.resize(static_cast<std::size_t>(n));
}

std::vector<double> MfccComputer::Compute(std::span<const double> frame) {
  spectrum_.Compute(frame, &power_);
  const int n = filterbank_.n_mels;
  const int bins = filterbank_.n_bins;
  for (int m = 0; m < n; ++m) {
    const double* w = filterbank_.weights.data() + static_cast<std::size_t>(m) * bins;
    double e = 0.0;
    for (int k = 0; k < bins; ++k) e += w[k] * power_[k];
    log_energy_[m] = std::log(std::max(e, kLogEnergyFloor));
  }
  std::vector<double> ceps(static_cast<std::size_t>(n_ceps_));
  for (int j = 0; j < n_ceps_; ++j) {
    const double* row = dct_.data() + static_cast<std::size_t>(j) * n;
    double acc = 0.0;
    for (int i = 0; i < n; ++i) acc += row[i] * log_energy_[i];
    ceps[j] = acc;
  }
  return ceps;
}

std::vector<double> MfccFrame(std::span<const double> frame,
                              const MelFilterbank& filterbank,
                              const FeatureConfig& config) {
  MfccComputer computer(filterbank, config);
  return computer.Compute(frame);
}

std::vector<std::vector<double>> Delta(
    const std::vector<std::vector<double>>& coeffs, int span) {
  if (span < 1) {
    throw Error(ErrorCode::kInvalidArgument, "delta span must be >= 1");
  }
  const auto n = static_cast<std::ptrdiff_t>(coeffs.size());
  std::vector<std::vector<double>> out(coeffs.size());
  if (n == 0) return out;
  double denom = 0.0;
  for (int k = 1; k <= span; ++k) denom += static_cast<double>(k) * k;
  denom *= 2.0;
  const std::size_t dim = coeffs[0].size();
  for (std::ptrdiff_t t = 0; t < n; ++t) {
    std::vector<double> d(dim, 0.0);
    for (int k = 1; k <= span; ++k) {
      const auto& fwd = coeffs[static_cast<std::size_t>(std::min(t + k, n - 1))];
      const auto& bwd = coeffs[static_cast<std::size_t>(std::max<std::ptrdiff_t>(t - k, 0))];
      for (std::size_t i = 0; i < dim; ++i) d[i] += k * (fwd[i] - bwd[i]);
    }
    for (double& v : d) v /= denom;
    out[static_cast<std::size_t>(t)] = std::move(d);
  }
  return out;
}

FeatureExtractor::FeatureExtractor(const FeatureConfig& config, int sample_rate)
    : config_(config),
      sample_rate_(sample_rate),
      frame_samples_((config.Validate(sample_rate), config.FrameSamples(sample_rate))),
      hop_samples_(config.HopSamples(sample_rate)),
      window_(HammingWindow(frame_samples_)),
      mfcc_(BuildMelFilterbank(config, sample_rate), config),
      frame_buf_(static_cast<std::size_t>(frame_samples_)) {}

void FeatureExtractor::Push(std::span<const double> samples,
                            std::vector<FeatureFrame>* out) {
  if (samples.empty()) return;
  if (!started_) {
    prev_sample_ = samples[0];
    started_ = true;
  }
  pending_.reserve(pending_.size() + samples.size());
  for (double x : samples) {
    pending_.push_back(x - config_.preemphasis * prev_sample_);
    prev_sample_ = x;
  }

  const auto frame = static_cast<std::size_t>(frame_samples_);
  const auto hop = static_cast<std::size_t>(hop_samples_);
  while (next_frame_ * hop + frame <= pending_start_ + pending_.size()) {
    const std::size_t offset = next_frame_ * hop - pending_start_;
    for (std::size_t i = 0; i < frame; ++i) {
      frame_buf_[i] = pending_[offset + i] * window_[i];
    }
    statics_.push_back(mfcc_.Compute(frame_buf_));
    ++next_frame_;
  }
  const std::size_t keep_from = next_frame_ * hop;
  if (keep_from > pending_start_) {
    const std::size_t drop = std::min(keep_from - pending_start_, pending_.size());
    pending_.erase(pending_.begin(), pending_.begin() + static_cast<std::ptrdiff_t>(drop));
    pending_start_ += drop;
  }
  EmitReady(false, out);
}

void FeatureExtractor::Finish(std::vector<FeatureFrame>* out) {
  EmitReady(true, out);
}

void FeatureExtractor::EmitReady(bool finishing,
                                 std::vector<FeatureFrame>* out) {
  const std::size_t span = static_cast<std::size_t>(config_.delta_span_frames);
  const std::size_t known = next_frame_;
  if (known == 0) return;
  double denom = 0.0;
  for (std::size_t k = 1; k <= span; ++k) denom += static_cast<double>(k * k);
  denom *= 2.0;

  auto get = [&](std::ptrdiff_t idx) -> const std::vector<double>& {
    const auto last = static_cast<std::ptrdiff_t>(known) - 1;
    const auto clamped = static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(idx, 0, last));
    return statics_[clamped - statics_first_];
  };

  const std::size_t n_ceps = static_cast<std::size_t>(config_.n_ceps);
  while (emitted_ < known && (finishing || emitted_ + span < known)) {
    const auto t = static_cast<std::ptrdiff_t>(emitted_);
    FeatureFrame f;
    f.t = static_cast<double>(emitted_) * hop_samples_ / sample_rate_;
    f.v.resize(2 * n_ceps);
    const auto& base = get(t);
    std::copy(base.begin(), base.end(), f.v.begin());
    for (std::size_t k = 1; k <= span; ++k) {
      const auto& fwd = get(t + static_cast<std::ptrdiff_t>(k));
      const auto& bwd = get(t - static_cast<std::ptrdiff_t>(k));
      for (std::size_t i = 0; i < n_ceps; ++i) {
        f.v[n_ceps + i] += static_cast<double>(k) * (fwd[i] - bwd[i]);
      }
    }
    for (std::size_t i = 0; i < n_ceps; ++i) f.v[n_ceps + i] /= denom;
    out->push_back(std::move(f));
    ++emitted_;
    while (statics_first_ + span < emitted_ && statics_.size() > 1) {
      statics_.pop_front();
      ++statics_first_;
    }
  }
}

nlohmann::json FeatureConfigToJson(const FeatureConfig& config) {
  return nlohmann::json{{"frame_len_ms", config.frame_len_ms},
                        {"hop_ms", config.hop_ms},
                        {"fft_size", config.fft_size},
                        {"n_mels", config.n_mels},
                        {"fmin_hz", config.fmin_hz},
                        {"fmax_hz", config.fmax_hz},
                        {"n_ceps", config.n_ceps},
                        {"delta_span_frames", config.delta_span_frames},
                        {"preemphasis", config.preemphasis}};
}

FeatureConfig FeatureConfigFromJson(const nlohmann::json& j) {
  FeatureConfig c;
  if (!j.is_object()) {
    throw Error(ErrorCode::kMalformedFile, "feature config is not an object");
  }
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "frame_len_ms") c.frame_len_ms = value.get<double>();
      else if (key == "hop_ms") c.hop_ms = value.get<double>();
      else if (key == "fft_size") c.fft_size = value.get<int>();
      else if (key == "n_mels") c.n_mels = value.get<int>();
      else if (key == "fmin_hz") c.fmin_hz = value.get<double>();
      else if (key == "fmax_hz") c.fmax_hz = value.get<double>();
      else if (key == "n_ceps") c.n_ceps = value.get<int>();
      else if (key == "delta_span_frames") c.delta_span_frames = value.get<int>();
      else if (key == "preemphasis") c.preemphasis = value.get<double>();
      else throw Error(ErrorCode::kMalformedFile, "unknown feature key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kMalformedFile, std::string("feature config: ") + e.what());
  }
  return c;
}

FeatureSequence ExtractFeatures(const AudioBuffer& buffer,
                                const FeatureConfig& config) {
  if (buffer.channels != 1) {
    throw Error(ErrorCode::kUnsupportedLayout, "feature extraction needs mono audio");
  }
  config.Validate(buffer.sample_rate);
  const int frame = config.FrameSamples(buffer.sample_rate);
  if (buffer.samples.size() < static_cast<std::size_t>(frame)) {
    throw Error(ErrorCode::kTooShort,
                std::to_string(buffer.samples.size()) +
                    " samples is less than one frame of " +
                    std::to_string(frame));
  }
  FeatureExtractor extractor(config, buffer.sample_rate);
  std::vector<FeatureFrame> frames;
  frames.reserve(FrameCount(buffer.samples.size(), frame,
                            config.HopSamples(buffer.sample_rate)));
  extractor.Push(buffer.samples, &frames);
  extractor.Finish(&frames);

  FeatureSequence seq;
  seq.config = config;
  seq.sample_rate = buffer.sample_rate;
  seq.vectors.reserve(frames.size());
  seq.timestamps.reserve(frames.size());
  for (auto& f : frames) {
    seq.timestamps.push_back(f.t);
    seq.vectors.push_back(std::move(f.v));
  }
  return seq;
}

}  // namespace hlight
