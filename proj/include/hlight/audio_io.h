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

#ifndef HLIGHT_AUDIO_IO_H_
#define HLIGHT_AUDIO_IO_H_

#include <cstdint>
#include <fstream>
#include <span>
#include <string>
#include <vector>

namespace hlight {

// PCM audio normalized to [-1, 1]. Multi-channel audio is interleaved.
struct AudioBuffer {
  std::vector<double> samples;
  int sample_rate = 0;
  int channels = 1;

  std::size_t frames() const {
    return channels > 0 ? samples.size() / static_cast<std::size_t>(channels)
                        : 0;
  }
  double duration_s() const {
    return sample_rate > 0 ? static_cast<double>(frames()) / sample_rate : 0.0;
  }
};

inline constexpr int kCanonicalSampleRate = 16000;

// Throws kInvalidArgument if rate/channels are non-positive, a sample is
// non-finite or outside [-1, 1], or the interleaving is ragged.
void ValidateAudioBuffer(const AudioBuffer& buffer);

struct WavInfo {
  int sample_rate = 0;
  int channels = 0;
  int bits_per_sample = 0;
  std::uint64_t frames = 0;
};

// Incremental RIFF/WAVE PCM reader; lets long recordings be processed in
// bounded memory.
class WavReader {
 public:
  explicit WavReader(const std::string& path);

  const WavInfo& info() const { return info_; }

  // Reads up to `max_frames` frames of interleaved normalized samples.
  // Returns an empty vector at end of data.
  std::vector<double> Read(std::size_t max_frames);

 private:
  std::string path_;
  std::ifstream in_;
  WavInfo info_;
  std::uint64_t frames_left_ = 0;
  std::vector<char> raw_;
};

// Reads a whole WAV file. Channels are kept interleaved; see DownmixMono.
AudioBuffer LoadWav(const std::string& path);

// Writes 16-bit PCM. Samples are clamped to [-1, 1] and rounded.
void WriteWav16(const std::string& path, const AudioBuffer& buffer);

// Mean of the channels. Mono input is returned unchanged; more than two
// channels is kUnsupportedLayout.
AudioBuffer DownmixMono(const AudioBuffer& buffer);

// Streaming Kaiser-windowed sinc resampler (beta 8, 16 taps per side at the
// lower of the two rates). Feeding a signal in any chunking yields the same
// output as feeding it at once.
class StreamingResampler {
 public:
  static constexpr int kTapsPerSide = 16;
  static constexpr double kKaiserBeta = 8.0;

  StreamingResampler(int input_rate, int output_rate);

  void Push(std::span<const double> input, std::vector<double>* output);
  // Emits the tail, treating samples past the end as zero. The total output
  // length is round(n_in * output_rate / input_rate).
  void Finish(std::vector<double>* output);

  int input_rate() const { return input_rate_; }
  int output_rate() const { return output_rate_; }

 private:
  double Kernel(double offset) const;
  void Emit(std::int64_t available_end, bool finishing,
            std::vector<double>* output);
  std::int64_t TotalOutput() const;

  int input_rate_;
  int output_rate_;
  bool passthrough_;
  std::int64_t up_ = 1;    // output_rate / gcd
  std::int64_t down_ = 1;  // input_rate / gcd
  double scale_ = 1.0;
  double half_width_ = 0.0;  // kernel support per side, input samples
  int reach_ = 0;            // taps per side actually visited
  std::vector<double> table_;  // up_ phases x 2*reach_ taps, if small enough

  std::vector<double> history_;
  std::int64_t history_start_ = 0;
  std::int64_t consumed_ = 0;
  std::int64_t next_output_ = 0;
};

// Resamples every channel. Equal rates return the buffer unchanged.
AudioBuffer Resample(const AudioBuffer& buffer, int target_rate);

// Downmix + resample to kCanonicalSampleRate.
AudioBuffer ToCanonical(const AudioBuffer& buffer);

}  // namespace hlight

#endif  // HLIGHT_AUDIO_IO_H_
