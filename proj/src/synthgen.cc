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

#include "hlight/synthgen.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include "hlight/error.h"

namespace hlight {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kPeakCeiling = 0.99;

std::uint64_t MixSeed(std::uint64_t seed, std::uint64_t salt) {
  // splitmix64 finalizer
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::size_t SampleCount(double dur_s, int sample_rate) {
  if (!(dur_s >= 0.0) || !std::isfinite(dur_s)) {
    throw Error(ErrorCode::kInvalidArgument, "duration must be non-negative");
  }
  if (sample_rate <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "sample rate must be positive");
  }
  return static_cast<std::size_t>(std::llround(dur_s * sample_rate));
}

AudioBuffer MakeBuffer(std::size_t n, int sample_rate) {
  AudioBuffer b;
  b.sample_rate = sample_rate;
  b.channels = 1;
  b.samples.assign(n, 0.0);
  return b;
}

double Rms(const std::vector<double>& x) {
  if (x.empty()) return 0.0;
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s / static_cast<double>(x.size()));
}

void ScaleToRms(std::vector<double>* x, double target) {
  const double rms = Rms(*x);
  if (rms <= 0.0) return;
  for (double& v : *x) v *= target / rms;
}

void LimitPeak(std::vector<double>* x) {
  double peak = 0.0;
  for (double v : *x) peak = std::max(peak, std::abs(v));
  if (peak > kPeakCeiling) {
    for (double& v : *x) v *= kPeakCeiling / peak;
  }
}

void AddInto(std::vector<double>* dst, const std::vector<double>& src,
             std::size_t offset, double gain) {
  for (std::size_t i = 0; i < src.size() && offset + i < dst->size(); ++i) {
    (*dst)[offset + i] += gain * src[i];
  }
}

// RBJ cookbook second-order section, Q = 1/sqrt(2).
class Biquad {
 public:
  static Biquad LowPass(double fc, int sr) { return Biquad(fc, sr, false); }
  static Biquad HighPass(double fc, int sr) { return Biquad(fc, sr, true); }

  double Process(double x) {
    const double y = b0_ * x + b1_ * x1_ + b2_ * x2_ - a1_ * y1_ - a2_ * y2_;
    x2_ = x1_;
    x1_ = x;
    y2_ = y1_;
    y1_ = y;
    return y;
  }

 private:
  Biquad(double fc, int sr, bool high) {
    const double w0 = 2.0 * kPi * fc / sr;
    const double alpha = std::sin(w0) / std::numbers::sqrt2;  // 2Q with Q = 1/sqrt(2)
    const double c = std::cos(w0);
    const double a0 = 1.0 + alpha;
    if (high) {
      b0_ = (1.0 + c) / 2.0 / a0;
      b1_ = -(1.0 + c) / a0;
    } else {
      b0_ = (1.0 - c) / 2.0 / a0;
      b1_ = (1.0 - c) / a0;
    }
    b2_ = b0_;
    a1_ = -2.0 * c / a0;
    a2_ = (1.0 - alpha) / a0;
  }

  double b0_, b1_, b2_, a1_, a2_;
  double x1_ = 0, x2_ = 0, y1_ = 0, y2_ = 0;
};

// Two-pole resonator with switchable centre frequency.
class Resonator {
 public:
  void Set(double freq, double bandwidth, int sr) {
    const double r = std::exp(-kPi * bandwidth / sr);
    a1_ = 2.0 * r * std::cos(2.0 * kPi * freq / sr);
    a2_ = -r * r;
    gain_ = 1.0 - r;
  }
  double Process(double x) {
    const double y = gain_ * x + a1_ * y1_ + a2_ * y2_;
    y2_ = y1_;
    y1_ = y;
    return y;
  }

 private:
  double a1_ = 0, a2_ = 0, gain_ = 0;
  double y1_ = 0, y2_ = 0;
};

struct VoiceProfile {
  double f0_hz;
  double pitch_spread;     // per-syllable target spread, fraction of f0
  double contour_depth;    // rise-fall within a syllable, fraction
  double syllable_rate_hz;
  double amp_spread;
  double tilt;             // one-pole source lowpass; lower is brighter
  double formant_shift;    // F1 scale
  double rms;
};

constexpr VoiceProfile kUnexcitedVoice{110.0, 0.08, 0.05, 4.0, 0.15, 0.93, 1.0,
                                       kReferenceRms};
// 1.5x pitch, livelier contour, faster syllables, +4 dB.
const VoiceProfile kExcitedVoice{165.0, 0.25, 0.20, 6.0, 0.45, 0.78, 1.15,
                                 kReferenceRms * 1.5848931924611136};

constexpr std::array<std::array<double, 3>, 5> kVowels = {{
    {730.0, 1090.0, 2440.0},
    {270.0, 2290.0, 3010.0},
    {300.0, 870.0, 2240.0},
    {530.0, 1840.0, 2480.0},
    {570.0, 840.0, 2410.0},
}};

std::vector<double> WhistleTrain(double dur_s, int sr, std::mt19937_64& rng) {
  std::vector<double> out(SampleCount(dur_s, sr), 0.0);
  std::uniform_real_distribution<double> len(0.4, 1.5);
  std::uniform_real_distribution<double> pitch(2200.0, 3800.0);
  double t = 0.0;
  while (t < dur_s) {
    const double d = std::min(len(rng), dur_s - t);
    const AudioBuffer tone = GenWhistle(d, pitch(rng), sr, rng());
    AddInto(&out, tone.samples, static_cast<std::size_t>(std::llround(t * sr)), 1.0);
    t += d;
  }
  return out;
}

std::vector<double> CrowdBed(double dur_s, int sr, std::uint64_t seed,
                             double snr_db) {
  std::vector<double> bed = GenCrowd(dur_s, sr, seed).samples;
  const double gain = std::pow(10.0, -snr_db / 20.0);
  for (double& v : bed) v *= gain;
  return bed;
}

}  // namespace

AudioBuffer GenWhistle(double dur_s, double f0_hz, int sample_rate,
                       std::uint64_t seed) {
  const std::size_t n = SampleCount(dur_s, sample_rate);
  if (!(f0_hz > 0.0) || f0_hz >= sample_rate / 2.0) {
    throw Error(ErrorCode::kInvalidArgument,
                "whistle f0 " + std::to_string(f0_hz) + " Hz would alias at " +
                    std::to_string(sample_rate) + " Hz");
  }
  AudioBuffer b = MakeBuffer(n, sample_rate);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double vib_rate = 5.0 + 3.0 * u(rng);
  const double vib_phase = 2.0 * kPi * u(rng);
  const double vib_depth = 0.001;
  const bool harmonic = 2.0 * f0_hz < sample_rate / 2.0;
  const double ramp = 0.010 * sample_rate;
  double phase = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / sample_rate;
    const double f = f0_hz * (1.0 + vib_depth * std::sin(2.0 * kPi * vib_rate * t + vib_phase));
    phase += 2.0 * kPi * f / sample_rate;
    double s = 0.6 * std::sin(phase);
    if (harmonic) s += 0.18 * std::sin(2.0 * phase);
    const double from_start = static_cast<double>(i);
    const double to_end = static_cast<double>(n - 1 - i);
    const double env = std::min({1.0, from_start / ramp, to_end / ramp});
    b.samples[i] = s * env;
  }
  return b;
}

AudioBuffer GenSpeechLike(double dur_s, bool excited, int sample_rate,
                          std::uint64_t seed) {
  if (!(dur_s > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "speech duration must be positive");
  }
  const std::size_t n = SampleCount(dur_s, sample_rate);
  AudioBuffer b = MakeBuffer(n, sample_rate);
  const VoiceProfile& v = excited ? kExcitedVoice : kUnexcitedVoice;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> vowel(0, kVowels.size() - 1);

  std::array<Resonator, 3> formants;
  const std::array<double, 3> bandwidths = {80.0, 100.0, 140.0};
  const std::array<double, 3> formant_gain = {1.0, 0.6, 0.3};
  double source_state = 0.0;
  double glottal_phase = 0.0;
  constexpr double kEnvFloor = 0.35;

  std::size_t i = 0;
  while (i < n) {
    const double syl_s = (1.0 / v.syllable_rate_hz) * (1.0 + 0.3 * u(rng));
    const std::size_t syl_len =
        std::max<std::size_t>(1, static_cast<std::size_t>(syl_s * sample_rate));
    const double target = v.f0_hz * (1.0 + v.pitch_spread * u(rng));
    const double amp = 1.0 + v.amp_spread * u(rng);
    const auto& f = kVowels[vowel(rng)];
    for (int k = 0; k < 3; ++k) {
      const double freq = std::min(f[k] * (k == 0 ? v.formant_shift : 1.0),
                                   0.45 * sample_rate);
      formants[k].Set(freq, bandwidths[k], sample_rate);
    }
    for (std::size_t j = 0; j < syl_len && i < n; ++j, ++i) {
      const double tau = static_cast<double>(j) / syl_len;
      const double f0 = target * (1.0 + v.contour_depth * std::sin(kPi * tau));
      glottal_phase += f0 / sample_rate;
      double pulse = 0.0;
      if (glottal_phase >= 1.0) {
        glottal_phase -= 1.0;
        pulse = 1.0;
      }
      source_state = pulse + 0.03 * noise(rng) + v.tilt * source_state;
      double y = 0.0;
      for (int k = 0; k < 3; ++k) y += formant_gain[k] * formants[k].Process(source_state);
      const double s = std::sin(kPi * tau);
      const double env = kEnvFloor + (1.0 - kEnvFloor) * s * s;
      b.samples[i] = y * env * amp;
    }
  }
  // Broadcast-style soft limiting keeps glottal peaks clear of full scale
  // without pulling the loud voice back down to the calm one.
  ScaleToRms(&b.samples, v.rms);
  constexpr double kKnee = 0.5;
  for (double& x : b.samples) x = kKnee * std::tanh(x / kKnee);
  ScaleToRms(&b.samples, v.rms);
  LimitPeak(&b.samples);
  return b;
}

AudioBuffer GenCrowd(double dur_s, int sample_rate, std::uint64_t seed) {
  const std::size_t n = SampleCount(dur_s, sample_rate);
  AudioBuffer b = MakeBuffer(n, sample_rate);
  if (n == 0) return b;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);
  const double p1 = phase(rng);
  const double p2 = phase(rng);
  std::array<Biquad, 4> filters = {
      Biquad::HighPass(200.0, sample_rate), Biquad::HighPass(200.0, sample_rate),
      Biquad::LowPass(4000.0, sample_rate), Biquad::LowPass(4000.0, sample_rate)};
  for (std::size_t i = 0; i < n; ++i) {
    double x = noise(rng);
    for (auto& f : filters) x = f.Process(x);
    const double t = static_cast<double>(i) / sample_rate;
    const double am = 1.0 + 0.25 * std::sin(2.0 * kPi * 0.2 * t + p1) +
                      0.15 * std::sin(2.0 * kPi * 0.53 * t + p2);
    b.samples[i] = x * am;
  }
  ScaleToRms(&b.samples, kReferenceRms);
  LimitPeak(&b.samples);
  return b;
}

AudioBuffer GenMusic(double dur_s, int sample_rate, std::uint64_t seed) {
  const std::size_t n = SampleCount(dur_s, sample_rate);
  AudioBuffer b = MakeBuffer(n, sample_rate);
  if (n == 0) return b;
  std::mt19937_64 rng(seed);
  constexpr std::array<int, 7> kScale = {0, 2, 4, 5, 7, 9, 11};
  std::uniform_int_distribution<std::size_t> degree(0, kScale.size() - 1);
  const double beat_s = 0.5;
  const auto beat_len = static_cast<std::size_t>(beat_s * sample_rate);
  std::array<double, 3> notes{};
  std::array<double, 3> phases{};
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t in_beat = i % beat_len;
    if (in_beat == 0) {
      const std::size_t root = degree(rng);
      for (std::size_t k = 0; k < 3; ++k) {
        const std::size_t d = root + 2 * k;
        const int midi = 52 + kScale[d % kScale.size()] + 12 * static_cast<int>(d / kScale.size());
        notes[k] = 440.0 * std::pow(2.0, (midi - 69) / 12.0);
      }
    }
    const double tb = static_cast<double>(in_beat) / sample_rate;
    const double env = 0.3 + 0.7 * std::exp(-tb / 0.15);
    double s = 0.0;
    for (std::size_t k = 0; k < 3; ++k) {
      phases[k] += 2.0 * kPi * notes[k] / sample_rate;
      for (int h = 1; h <= 5; ++h) {
        if (h * notes[k] < sample_rate / 2.0) s += std::sin(h * phases[k]) / h;
      }
    }
    b.samples[i] = s * env;
  }
  ScaleToRms(&b.samples, kReferenceRms);
  LimitPeak(&b.samples);
  return b;
}

std::string SynthKindName(SynthKind kind) {
  switch (kind) {
    case SynthKind::kWhistle:
      return "whistle";
    case SynthKind::kExcited:
      return "excited";
    case SynthKind::kUnexcited:
      return "unexcited";
    case SynthKind::kCrowd:
      return "crowd";
    case SynthKind::kMusic:
      return "music";
    case SynthKind::kSilence:
      return "silence";
  }
  return "crowd";
}

SynthKind ParseSynthKind(const std::string& name) {
  for (SynthKind k : {SynthKind::kWhistle, SynthKind::kExcited, SynthKind::kUnexcited,
                      SynthKind::kCrowd, SynthKind::kMusic, SynthKind::kSilence}) {
    if (SynthKindName(k) == name) return k;
  }
  throw Error(ErrorCode::kMalformedFile, "unknown event kind '" + name + "'");
}

void MatchScript::Validate() const {
  if (!(total_s > 0.0)) throw Error(ErrorCode::kInvalidArgument, "total_s must be positive");
  if (sample_rate <= 0) throw Error(ErrorCode::kInvalidArgument, "bad sample rate");
  for (const auto& e : events) {
    if (!(e.start_s >= 0.0) || !(e.dur_s > 0.0) || e.start_s + e.dur_s > total_s + 1e-9) {
      throw Error(ErrorCode::kInvalidArgument,
                  "event at " + std::to_string(e.start_s) + " s lies outside [0, total_s]");
    }
    if (!IsHighlightKind(e.highlight)) {
      throw Error(ErrorCode::kInvalidArgument, "unknown highlight kind '" + e.highlight + "'");
    }
  }
}

nlohmann::json ScriptToJson(const MatchScript& script) {
  nlohmann::json events = nlohmann::json::array();
  for (const auto& e : script.events) {
    events.push_back({{"start_s", e.start_s},
                      {"dur_s", e.dur_s},
                      {"kind", SynthKindName(e.kind)},
                      {"params", e.params},
                      {"highlight", e.highlight}});
  }
  return nlohmann::json{{"total_s", script.total_s},
                        {"seed", script.seed},
                        {"snr_db", script.snr_db},
                        {"sample_rate", script.sample_rate},
                        {"events", events}};
}

MatchScript ScriptFromJson(const nlohmann::json& j) {
  MatchScript s;
  try {
    s.total_s = j.at("total_s").get<double>();
    s.seed = j.value("seed", std::uint64_t{0});
    s.snr_db = j.value("snr_db", kDefaultSnrDb);
    s.sample_rate = j.value("sample_rate", kCanonicalSampleRate);
    for (const auto& e : j.at("events")) {
      ScriptEvent ev;
      ev.start_s = e.at("start_s").get<double>();
      ev.dur_s = e.at("dur_s").get<double>();
      ev.kind = ParseSynthKind(e.at("kind").get<std::string>());
      if (e.contains("params")) ev.params = e.at("params").get<std::map<std::string, double>>();
      ev.highlight = e.value("highlight", std::string("other_highlight"));
      s.events.push_back(std::move(ev));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kMalformedFile, std::string("script: ") + e.what());
  }
  s.Validate();
  return s;
}

MatchScript LoadScript(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kFileNotFound, path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kMalformedFile, path + ": " + e.what());
  }
  return ScriptFromJson(j);
}

void SaveScript(const std::string& path, const MatchScript& script) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot open " + path);
  out << ScriptToJson(script).dump(1) << "\n";
}

RenderedMatch RenderMatch(const MatchScript& script) {
  script.Validate();
  const int sr = script.sample_rate;
  RenderedMatch out;
  out.audio = MakeBuffer(SampleCount(script.total_s, sr), sr);
  auto& mix = out.audio.samples;
  AddInto(&mix, CrowdBed(script.total_s, sr, MixSeed(script.seed, 1), script.snr_db), 0, 1.0);

  for (std::size_t i = 0; i < script.events.size(); ++i) {
    const ScriptEvent& e = script.events[i];
    const std::uint64_t seed = MixSeed(script.seed, 1000 + i);
    const auto param = [&](const char* key, double fallback) {
      const auto it = e.params.find(key);
      return it == e.params.end() ? fallback : it->second;
    };
    const double gain = std::pow(10.0, param("gain_db", 0.0) / 20.0);
    const auto offset = static_cast<std::size_t>(std::llround(e.start_s * sr));
    switch (e.kind) {
      case SynthKind::kWhistle:
        AddInto(&mix, GenWhistle(e.dur_s, param("f0_hz", 3000.0), sr, seed).samples, offset, gain);
        break;
      case SynthKind::kExcited:
      case SynthKind::kUnexcited:
        AddInto(&mix,
                GenSpeechLike(e.dur_s, e.kind == SynthKind::kExcited, sr, seed).samples,
                offset, gain);
        break;
      case SynthKind::kCrowd:
        AddInto(&mix, GenCrowd(e.dur_s, sr, seed).samples, offset, gain);
        break;
      case SynthKind::kMusic:
        AddInto(&mix, GenMusic(e.dur_s, sr, seed).samples, offset, gain);
        break;
      case SynthKind::kSilence:
        break;
    }
  }
  for (const auto& e : script.events) {
    if (e.kind != SynthKind::kSilence) continue;
    const auto a = static_cast<std::size_t>(std::llround(e.start_s * sr));
    const auto b = std::min(mix.size(), static_cast<std::size_t>(std::llround((e.start_s + e.dur_s) * sr)));
    for (std::size_t k = a; k < b; ++k) mix[k] = 0.0;
  }
  LimitPeak(&mix);

  // Key-event truth, same-kind overlaps merged.
  std::map<std::string, std::vector<AnnotatedInterval>> by_kind;
  std::vector<const ScriptEvent*> key_events;
  for (const auto& e : script.events) {
    std::string kind;
    if (e.kind == SynthKind::kWhistle) kind = KeyEventKind(EventLabel::kWhistle);
    if (e.kind == SynthKind::kExcited) kind = KeyEventKind(EventLabel::kExcitedSpeech);
    if (e.kind == SynthKind::kUnexcited) kind = KeyEventKind(EventLabel::kUnexcitedSpeech);
    if (kind.empty()) continue;
    by_kind[kind].push_back({e.start_s, e.start_s + e.dur_s, kind});
    if (e.kind != SynthKind::kUnexcited) key_events.push_back(&e);
  }
  for (auto& [kind, list] : by_kind) {
    std::sort(list.begin(), list.end(),
              [](const auto& a, const auto& b) { return a.start_s < b.start_s; });
    std::vector<AnnotatedInterval> merged;
    for (const auto& iv : list) {
      if (!merged.empty() && iv.start_s <= merged.back().end_s) {
        merged.back().end_s = std::max(merged.back().end_s, iv.end_s);
      } else {
        merged.push_back(iv);
      }
    }
    out.truth.intervals.insert(out.truth.intervals.end(), merged.begin(), merged.end());
  }

  // Scene truth: groups of nearby key events.
  std::sort(key_events.begin(), key_events.end(),
            [](auto* a, auto* b) { return a->start_s < b->start_s; });
  for (std::size_t i = 0; i < key_events.size();) {
    double start = key_events[i]->start_s;
    double end = start + key_events[i]->dur_s;
    std::string kind = "other_highlight";
    std::size_t j = i;
    for (; j < key_events.size() && key_events[j]->start_s <= end + kSceneJoinGapS; ++j) {
      end = std::max(end, key_events[j]->start_s + key_events[j]->dur_s);
      if (kind == "other_highlight") kind = key_events[j]->highlight;
    }
    out.truth.intervals.push_back({start, end, kind});
    i = j;
  }
  std::stable_sort(out.truth.intervals.begin(), out.truth.intervals.end(),
                   [](const auto& a, const auto& b) { return a.start_s < b.start_s; });
  out.truth.Validate();
  return out;
}

MatchScript MakeDemoMatchScript(double total_s, int num_scenes,
                                std::uint64_t seed, double snr_db) {
  if (num_scenes < 0 || !(total_s > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "bad demo script parameters");
  }
  MatchScript script;
  script.total_s = total_s;
  script.seed = seed;
  script.snr_db = snr_db;
  std::mt19937_64 rng(MixSeed(seed, 7));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::array<const char*, 4> other_kinds = {"penalty", "foul", "interception",
                                                  "defense_foil"};

  // Busy spans keep commentary away from scenes and music.
  std::vector<std::pair<double, double>> busy;
  const double slot = num_scenes > 0 ? total_s / num_scenes : total_s;
  for (int i = 0; i < num_scenes; ++i) {
    const double start = slot * i + slot * (0.3 + 0.1 * u(rng));
    const double whistle_dur = 0.8 + 0.7 * u(rng);
    const double excited_dur = 8.0 + 4.0 * u(rng);
    const std::string highlight = i % 2 == 0 ? "try" : other_kinds[(i / 2) % other_kinds.size()];
    ScriptEvent w{start, whistle_dur, SynthKind::kWhistle,
                  {{"f0_hz", 2600.0 + 900.0 * u(rng)}}, highlight};
    ScriptEvent x{start + 0.3, excited_dur, SynthKind::kExcited, {}, highlight};
    script.events.push_back(w);
    script.events.push_back(x);
    double end = x.start_s + x.dur_s;
    if (i % 2 == 1) {
      ScriptEvent w2{end - 1.0, 0.8, SynthKind::kWhistle,
                     {{"f0_hz", 2600.0 + 900.0 * u(rng)}}, highlight};
      script.events.push_back(w2);
    }
    busy.push_back({start - 3.0, end + 3.0});
    if (i % 3 == 1) {
      const double m = slot * i + slot * 0.75;
      const double len = 6.0 + 4.0 * u(rng);
      if (m + len < std::min(total_s, slot * (i + 1))) {
        script.events.push_back({m, len, SynthKind::kMusic, {}, "other_highlight"});
        busy.push_back({m - 1.0, m + len + 1.0});
      }
    }
  }
  std::sort(busy.begin(), busy.end());

  // Commentary blocks in the free time.
  double t = 1.0 + u(rng);
  while (t < total_s - 2.0) {
    double len = 4.0 + 6.0 * u(rng);
    len = std::min(len, total_s - t);
    double end = t + len;
    for (const auto& [a, b] : busy) {
      if (a < end && b > t) {
        if (a > t + 2.0) {
          end = a;
        } else {
          end = t;
          t = b;
        }
        break;
      }
    }
    if (end - t >= 2.0) {
      script.events.push_back({t, end - t, SynthKind::kUnexcited, {}, "other_highlight"});
      t = end + 1.0 + 2.0 * u(rng);
    } else if (end <= t) {
      t += 0.5;
    } else {
      t = end + 0.5;
    }
  }
  std::stable_sort(script.events.begin(), script.events.end(),
                   [](const auto& a, const auto& b) { return a.start_s < b.start_s; });
  script.Validate();
  return script;
}

AudioBuffer RenderCategoryClip(EventLabel label, double dur_s, std::uint64_t seed,
                               double snr_db, int sample_rate) {
  const std::size_t n = SampleCount(dur_s, sample_rate);
  AudioBuffer b = MakeBuffer(n, sample_rate);
  if (n == 0) return b;
  AddInto(&b.samples, CrowdBed(dur_s, sample_rate, MixSeed(seed, 1), snr_db), 0, 1.0);
  std::mt19937_64 rng(MixSeed(seed, 2));
  switch (label) {
    case EventLabel::kExcitedSpeech:
    case EventLabel::kUnexcitedSpeech:
      AddInto(&b.samples,
              GenSpeechLike(dur_s, label == EventLabel::kExcitedSpeech, sample_rate,
                            MixSeed(seed, 3))
                  .samples,
              0, 1.0);
      break;
    case EventLabel::kWhistle:
      AddInto(&b.samples, WhistleTrain(dur_s, sample_rate, rng), 0, 1.0);
      break;
    case EventLabel::kOthers: {
      std::uniform_real_distribution<double> len(3.0, 6.0);
      double t = 0.0;
      int part = 0;
      while (t < dur_s) {
        const double d = std::min(len(rng), dur_s - t);
        const auto offset = static_cast<std::size_t>(std::llround(t * sample_rate));
        if (part % 3 == 1) {
          AddInto(&b.samples, GenMusic(d, sample_rate, rng()).samples, offset, 0.8);
        } else if (part % 3 == 2) {
          AddInto(&b.samples, GenCrowd(d, sample_rate, rng()).samples, offset, 1.0);
        }
        t += d;
        ++part;
      }
      break;
    }
  }
  LimitPeak(&b.samples);
  return b;
}

AudioBuffer RenderOverlapClip(double dur_s, std::uint64_t seed, double snr_db,
                              int sample_rate) {
  AudioBuffer b = RenderCategoryClip(EventLabel::kExcitedSpeech, dur_s, seed,
                                     snr_db, sample_rate);
  std::mt19937_64 rng(MixSeed(seed, 4));
  AddInto(&b.samples, WhistleTrain(dur_s, sample_rate, rng), 0, 1.0);
  LimitPeak(&b.samples);
  return b;
}

}  // namespace hlight
