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

#include "hlight/audio_io.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <numbers>
#include <numeric>

#include "hlight/error.h"

namespace hlight {
namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;
constexpr std::int64_t kMaxTablePhases = 4096;

std::uint32_t ReadLe32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t ReadLe16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void PutLe32(std::ofstream& out, std::uint32_t v) {
  const std::array<char, 4> b = {static_cast<char>(v & 0xFF),
                                 static_cast<char>((v >> 8) & 0xFF),
                                 static_cast<char>((v >> 16) & 0xFF),
                                 static_cast<char>((v >> 24) & 0xFF)};
  out.write(b.data(), 4);
}

void PutLe16(std::ofstream& out, std::uint16_t v) {
  const std::array<char, 2> b = {static_cast<char>(v & 0xFF),
                                 static_cast<char>((v >> 8) & 0xFF)};
  out.write(b.data(), 2);
}

double Sinc(double x) {
  if (x == 0.0) return 1.0;
  const double px = std::numbers::pi * x;
  return std::sin(px) / px;
}

std::int64_t FloorDiv(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

}  // namespace

void ValidateAudioBuffer(const AudioBuffer& buffer) {
  if (buffer.sample_rate <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "sample rate must be positive");
  }
  if (buffer.channels <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "channel count must be positive");
  }
  if (buffer.samples.size() % static_cast<std::size_t>(buffer.channels) != 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "sample count is not a multiple of the channel count");
  }
  for (double s : buffer.samples) {
    if (!std::isfinite(s) || s < -1.0 || s > 1.0) {
      throw Error(ErrorCode::kInvalidArgument,
                  "sample outside [-1, 1]: " + std::to_string(s));
    }
  }
}

WavReader::WavReader(const std::string& path) : path_(path) {
  if (!std::filesystem::exists(path)) {
    throw Error(ErrorCode::kFileNotFound, path);
  }
  in_.open(path, std::ios::binary);
  if (!in_) throw Error(ErrorCode::kFileNotFound, path);
  const auto file_size = std::filesystem::file_size(path);

  std::array<unsigned char, 12> riff{};
  if (!in_.read(reinterpret_cast<char*>(riff.data()), riff.size())) {
    throw Error(ErrorCode::kMalformedHeader, path + ": shorter than RIFF header");
  }
  if (std::memcmp(riff.data(), "RIFF", 4) != 0 ||
      std::memcmp(riff.data() + 8, "WAVE", 4) != 0) {
    throw Error(ErrorCode::kMalformedHeader, path + ": not a RIFF/WAVE file");
  }

  bool have_fmt = false;
  int block_align = 0;
  while (true) {
    std::array<unsigned char, 8> chunk{};
    if (!in_.read(reinterpret_cast<char*>(chunk.data()), chunk.size())) {
      throw Error(ErrorCode::kMalformedHeader, path + ": no data chunk");
    }
    const std::uint32_t size = ReadLe32(chunk.data() + 4);
    if (std::memcmp(chunk.data(), "fmt ", 4) == 0) {
      if (size < 16) {
        throw Error(ErrorCode::kMalformedHeader,
                    path + ": fmt chunk of " + std::to_string(size) + " bytes");
      }
      std::vector<unsigned char> fmt(size + (size & 1));
      if (!in_.read(reinterpret_cast<char*>(fmt.data()), fmt.size())) {
        throw Error(ErrorCode::kMalformedHeader, path + ": truncated fmt chunk");
      }
      std::uint16_t tag = ReadLe16(fmt.data());
      if (tag == kFormatExtensible) {
        if (size < 26) {
          throw Error(ErrorCode::kMalformedHeader,
                      path + ": truncated WAVE_FORMAT_EXTENSIBLE header");
        }
        tag = ReadLe16(fmt.data() + 24);  // first two bytes of the subformat
      }
      if (tag != kFormatPcm) {
        throw Error(ErrorCode::kUnsupportedCodec,
                    path + ": format tag " + std::to_string(tag) +
                        " is not integer PCM");
      }
      info_.channels = ReadLe16(fmt.data() + 2);
      info_.sample_rate = static_cast<int>(ReadLe32(fmt.data() + 4));
      block_align = ReadLe16(fmt.data() + 12);
      info_.bits_per_sample = ReadLe16(fmt.data() + 14);
      if (info_.bits_per_sample != 8 && info_.bits_per_sample != 16 &&
          info_.bits_per_sample != 24) {
        throw Error(ErrorCode::kUnsupportedCodec,
                    path + ": " + std::to_string(info_.bits_per_sample) +
                        "-bit PCM");
      }
      if (info_.channels < 1 || info_.channels > 2) {
        throw Error(ErrorCode::kUnsupportedLayout,
                    path + ": " + std::to_string(info_.channels) + " channels");
      }
      if (info_.sample_rate <= 0) {
        throw Error(ErrorCode::kMalformedHeader, path + ": zero sample rate");
      }
      if (block_align != info_.channels * info_.bits_per_sample / 8) {
        throw Error(ErrorCode::kMalformedHeader,
                    path + ": block align " + std::to_string(block_align) +
                        " inconsistent with channels and bit depth");
      }
      have_fmt = true;
    } else if (std::memcmp(chunk.data(), "data", 4) == 0) {
      if (!have_fmt) {
        throw Error(ErrorCode::kMalformedHeader,
                    path + ": data chunk precedes fmt chunk");
      }
      // Streaming writers sometimes leave the size unset; trust the file.
      const std::uint64_t remaining =
          file_size - static_cast<std::uint64_t>(in_.tellg());
      const std::uint64_t bytes = std::min<std::uint64_t>(size, remaining);
      info_.frames = bytes / static_cast<std::uint64_t>(block_align);
      frames_left_ = info_.frames;
      return;
    } else {
      in_.seekg(size + (size & 1), std::ios::cur);
      if (!in_) {
        throw Error(ErrorCode::kMalformedHeader, path + ": truncated chunk");
      }
    }
  }
}

std::vector<double> WavReader::Read(std::size_t max_frames) {
  const std::size_t n =
      static_cast<std::size_t>(std::min<std::uint64_t>(max_frames, frames_left_));
  const int bytes_per_sample = info_.bits_per_sample / 8;
  const std::size_t count = n * static_cast<std::size_t>(info_.channels);
  raw_.resize(count * static_cast<std::size_t>(bytes_per_sample));
  if (n == 0) return {};
  if (!in_.read(raw_.data(), static_cast<std::streamsize>(raw_.size()))) {
    throw Error(ErrorCode::kIo, path_ + ": short read in data chunk");
  }
  frames_left_ -= n;

  std::vector<double> out(count);
  const auto* p = reinterpret_cast<const unsigned char*>(raw_.data());
  for (std::size_t i = 0; i < count; ++i) {
    switch (info_.bits_per_sample) {
      case 8:
        out[i] = (static_cast<int>(p[i]) - 128) / 128.0;
        break;
      case 16:
        out[i] = static_cast<std::int16_t>(ReadLe16(p + 2 * i)) / 32768.0;
        break;
      default: {
        const unsigned char* q = p + 3 * i;
        std::int32_t v = q[0] | (q[1] << 8) | (q[2] << 16);
        if (v & 0x800000) v -= 0x1000000;
        out[i] = v / 8388608.0;
      }
    }
  }
  return out;
}

AudioBuffer LoadWav(const std::string& path) {
  WavReader reader(path);
  AudioBuffer buffer;
  buffer.sample_rate = reader.info().sample_rate;
  buffer.channels = reader.info().channels;
  buffer.samples = reader.Read(static_cast<std::size_t>(reader.info().frames));
  return buffer;
}

void WriteWav16(const std::string& path, const AudioBuffer& buffer) {
  if (buffer.sample_rate <= 0 || buffer.channels <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "invalid buffer format");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot open " + path);
  const std::uint32_t data_bytes =
      static_cast<std::uint32_t>(buffer.samples.size() * 2);
  out.write("RIFF", 4);
  PutLe32(out, 36 + data_bytes);
  out.write("WAVE", 4);
  out.write("fmt ", 4);
  PutLe32(out, 16);
  PutLe16(out, kFormatPcm);
  PutLe16(out, static_cast<std::uint16_t>(buffer.channels));
  PutLe32(out, static_cast<std::uint32_t>(buffer.sample_rate));
  PutLe32(out, static_cast<std::uint32_t>(buffer.sample_rate * buffer.channels * 2));
  PutLe16(out, static_cast<std::uint16_t>(buffer.channels * 2));
  PutLe16(out, 16);
  out.write("data", 4);
  PutLe32(out, data_bytes);
  std::vector<char> bytes(buffer.samples.size() * 2);
  for (std::size_t i = 0; i < buffer.samples.size(); ++i) {
    const double s = std::clamp(buffer.samples[i], -1.0, 1.0);
    const long v = std::clamp(std::lround(s * 32768.0), -32768L, 32767L);
    const auto u = static_cast<std::uint16_t>(static_cast<std::int16_t>(v));
    bytes[2 * i] = static_cast<char>(u & 0xFF);
    bytes[2 * i + 1] = static_cast<char>(u >> 8);
  }
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path);
}

AudioBuffer DownmixMono(const AudioBuffer& buffer) {
  if (buffer.channels == 1) return buffer;
  if (buffer.channels != 2) {
    throw Error(ErrorCode::kUnsupportedLayout,
                std::to_string(buffer.channels) + " channels");
  }
  AudioBuffer mono;
  mono.sample_rate = buffer.sample_rate;
  mono.channels = 1;
  mono.samples.resize(buffer.frames());
  for (std::size_t i = 0; i < mono.samples.size(); ++i) {
    mono.samples[i] = 0.5 * (buffer.samples[2 * i] + buffer.samples[2 * i + 1]);
  }
  return mono;
}

StreamingResampler::StreamingResampler(int input_rate, int output_rate)
    : input_rate_(input_rate),
      output_rate_(output_rate),
      passthrough_(input_rate == output_rate) {
  if (input_rate <= 0 || output_rate <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "sample rates must be positive");
  }
  const std::int64_t g = std::gcd(input_rate, output_rate);
  up_ = output_rate / g;
  down_ = input_rate / g;
  scale_ = std::min(1.0, static_cast<double>(output_rate) / input_rate);
  half_width_ = kTapsPerSide / scale_;
  reach_ = static_cast<int>(std::ceil(half_width_));
  if (!passthrough_ && up_ <= kMaxTablePhases) {
    const int taps = 2 * reach_;
    table_.resize(static_cast<std::size_t>(up_ * taps));
    for (std::int64_t p = 0; p < up_; ++p) {
      const double frac = static_cast<double>(p) / up_;
      for (int m = -reach_ + 1; m <= reach_; ++m) {
        table_[static_cast<std::size_t>(p * taps + m + reach_ - 1)] =
            Kernel(frac - m);
      }
    }
  }
}

double StreamingResampler::Kernel(double offset) const {
  const double r = offset / half_width_;
  if (r <= -1.0 || r >= 1.0) return 0.0;
  const double window = std::cyl_bessel_i(0.0, kKaiserBeta * std::sqrt(1.0 - r * r)) /
                        std::cyl_bessel_i(0.0, kKaiserBeta);
  return scale_ * Sinc(scale_ * offset) * window;
}

std::int64_t StreamingResampler::TotalOutput() const {
  return (2 * consumed_ * up_ + down_) / (2 * down_);
}

void StreamingResampler::Emit(std::int64_t available_end, bool finishing,
                              std::vector<double>* output) {
  const int taps = 2 * reach_;
  const std::int64_t total = finishing ? TotalOutput() : 0;
  while (true) {
    const std::int64_t pos = next_output_ * down_;
    const std::int64_t base = pos / up_;
    const std::int64_t phase = pos % up_;
    if (finishing ? next_output_ >= total : base + reach_ >= available_end) {
      break;
    }
    double acc = 0.0;
    for (int m = -reach_ + 1; m <= reach_; ++m) {
      const std::int64_t k = base + m;
      if (k < 0 || k >= consumed_) continue;
      const double x = history_[static_cast<std::size_t>(k - history_start_)];
      const double h =
          table_.empty()
              ? Kernel(static_cast<double>(phase) / up_ - m)
              : table_[static_cast<std::size_t>(phase * taps + m + reach_ - 1)];
      acc += x * h;
    }
    output->push_back(acc);
    ++next_output_;
  }
  // Keep only what the next output still needs.
  const std::int64_t keep_from =
      FloorDiv(next_output_ * down_, up_) - reach_ + 1;
  const std::int64_t dead = keep_from - history_start_;
  if (dead > 4096) {
    history_.erase(history_.begin(), history_.begin() + dead);
    history_start_ = keep_from;
  }
}

void StreamingResampler::Push(std::span<const double> input,
                              std::vector<double>* output) {
  if (passthrough_) {
    output->insert(output->end(), input.begin(), input.end());
    return;
  }
  history_.insert(history_.end(), input.begin(), input.end());
  consumed_ += static_cast<std::int64_t>(input.size());
  Emit(consumed_, false, output);
}

void StreamingResampler::Finish(std::vector<double>* output) {
  if (passthrough_) return;
  Emit(consumed_, true, output);
}

AudioBuffer Resample(const AudioBuffer& buffer, int target_rate) {
  if (buffer.sample_rate <= 0 || target_rate <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "sample rates must be positive");
  }
  if (buffer.sample_rate == target_rate) return buffer;
  const int channels = buffer.channels;
  const std::size_t frames = buffer.frames();
  std::vector<std::vector<double>> per_channel(static_cast<std::size_t>(channels));
  std::vector<double> lane(frames);
  for (int c = 0; c < channels; ++c) {
    for (std::size_t i = 0; i < frames; ++i) {
      lane[i] = buffer.samples[i * channels + c];
    }
    StreamingResampler resampler(buffer.sample_rate, target_rate);
    resampler.Push(lane, &per_channel[c]);
    resampler.Finish(&per_channel[c]);
  }
  AudioBuffer out;
  out.sample_rate = target_rate;
  out.channels = channels;
  const std::size_t out_frames = per_channel[0].size();
  out.samples.resize(out_frames * channels);
  for (int c = 0; c < channels; ++c) {
    for (std::size_t i = 0; i < out_frames; ++i) {
      // Ringing can overshoot slightly near full scale.
      out.samples[i * channels + c] = std::clamp(per_channel[c][i], -1.0, 1.0);
    }
  }
  return out;
}

AudioBuffer ToCanonical(const AudioBuffer& buffer) {
  return Resample(DownmixMono(buffer), kCanonicalSampleRate);
}

}  // namespace hlight
