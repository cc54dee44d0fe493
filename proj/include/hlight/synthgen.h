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

#ifndef HLIGHT_SYNTHGEN_H_
#define HLIGHT_SYNTHGEN_H_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "hlight/audio_io.h"
#include "hlight/classifier.h"
#include "hlight/evalkit.h"
#include "json.hpp"

namespace hlight {

// Nominal RMS of commentary-level events; the crowd bed is set relative to
// it by the SNR.
inline constexpr double kReferenceRms = 0.1;
inline constexpr double kDefaultSnrDb = 15.0;

// f0 plus a weaker second harmonic, slight vibrato, 10 ms linear
// attack/release. Throws kInvalidArgument unless 0 < f0 < sr/2.
AudioBuffer GenWhistle(double dur_s, double f0_hz, int sample_rate,
                       std::uint64_t seed);

// Formant-filtered glottal pulse train with a syllable envelope. Excited
// mode raises pitch 1.5x, widens pitch movement, speeds up syllables,
// varies syllable energy more, brightens the source and plays 4 dB louder.
AudioBuffer GenSpeechLike(double dur_s, bool excited, int sample_rate,
                          std::uint64_t seed);

// 200-4000 Hz band-passed noise with slow amplitude modulation, at
// kReferenceRms.
AudioBuffer GenCrowd(double dur_s, int sample_rate, std::uint64_t seed);

// Harmonic chords changing on a beat grid, at kReferenceRms.
AudioBuffer GenMusic(double dur_s, int sample_rate, std::uint64_t seed);

enum class SynthKind { kWhistle, kExcited, kUnexcited, kCrowd, kMusic, kSilence };

std::string SynthKindName(SynthKind kind);
SynthKind ParseSynthKind(const std::string& name);

struct ScriptEvent {
  double start_s = 0.0;
  double dur_s = 0.0;
  SynthKind kind = SynthKind::kCrowd;
  // Optional: "f0_hz" (whistle), "gain_db" (any kind).
  std::map<std::string, double> params;
  // Highlight kind recorded for scenes this key event belongs to.
  std::string highlight = "other_highlight";
};

struct MatchScript {
  std::vector<ScriptEvent> events;
  double total_s = 0.0;
  std::uint64_t seed = 0;
  double snr_db = kDefaultSnrDb;
  int sample_rate = kCanonicalSampleRate;

  // Events inside [0, total_s], positive durations, known highlight kinds.
  void Validate() const;
};

nlohmann::json ScriptToJson(const MatchScript& script);
MatchScript ScriptFromJson(const nlohmann::json& j);
MatchScript LoadScript(const std::string& path);
void SaveScript(const std::string& path, const MatchScript& script);

// Key events closer than this are one scripted scene.
inline constexpr double kSceneJoinGapS = 2.0;

struct RenderedMatch {
  AudioBuffer audio;
  Annotation truth;
};

// Mixes every event over a continuous crowd bed whose RMS is
// kReferenceRms / 10^(snr_db/20); silence events mute the mix. The result is
// peak-normalized to at most 0.99. The annotation has one key_event interval
// per scripted whistle/excited/unexcited event (same-kind overlaps merged)
// and one highlight interval per group of whistle/excited events.
RenderedMatch RenderMatch(const MatchScript& script);

// A broadcast-like script: commentary, music breaks and `num_scenes`
// evenly spaced key-event scenes (whistle overlapping the start of excited
// commentary). Every other scene is labeled a try.
MatchScript MakeDemoMatchScript(double total_s, int num_scenes,
                                std::uint64_t seed,
                                double snr_db = kDefaultSnrDb);

// One training clip of a classifier category over a crowd bed. "others"
// cycles between bare crowd, music and louder crowd.
AudioBuffer RenderCategoryClip(EventLabel label, double dur_s,
                               std::uint64_t seed,
                               double snr_db = kDefaultSnrDb,
                               int sample_rate = kCanonicalSampleRate);

// Whistle and excited speech at once, over the crowd bed.
AudioBuffer RenderOverlapClip(double dur_s, std::uint64_t seed,
                              double snr_db = kDefaultSnrDb,
                              int sample_rate = kCanonicalSampleRate);

}  // namespace hlight

#endif  // HLIGHT_SYNTHGEN_H_
