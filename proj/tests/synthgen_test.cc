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
#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "hlight/features.h"
#include "test_util.h"

namespace hlight {
namespace {

using testing::TempDir;

constexpr int kRate = kCanonicalSampleRate;
constexpr int kFft = 4096;

// Power spectrum averaged over non-overlapping kFft blocks of x[from, to).
std::vector<double> AveragePower(const std::vector<double>& x, std::size_t from,
                                 std::size_t to) {
  PowerSpectrum ps(kFft);
  std::vector<double> avg(kFft / 2 + 1, 0.0), p;
  int blocks = 0;
  for (std::size_t s = from; s + kFft <= to; s += kFft) {
    ps.Compute(std::span<const double>(x).subspan(s, kFft), &p);
    for (std::size_t k = 0; k < avg.size(); ++k) avg[k] += p[k];
    ++blocks;
  }
  for (double& v : avg) v /= std::max(blocks, 1);
  return avg;
}

double BinHz() { return static_cast<double>(kRate) / kFft; }

std::size_t PeakBin(const std::vector<double>& p) {
  return static_cast<std::size_t>(std::max_element(p.begin() + 1, p.end()) - p.begin());
}

double Rms(const std::vector<double>& x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s / x.size());
}

double Centroid(const std::vector<double>& p) {
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    num += k * BinHz() * p[k];
    den += p[k];
  }
  return num / den;
}

TEST(GenWhistleTest, PeakAtFundamental) {
  for (double f0 : {2000.0, 2750.0, 3900.0}) {
    const AudioBuffer w = GenWhistle(1.0, f0, kRate, 1);
    ASSERT_EQ(w.samples.size(), 16000u);
    const auto p = AveragePower(w.samples, 0, w.samples.size());
    EXPECT_LE(std::abs(PeakBin(p) * BinHz() - f0), BinHz()) << f0;
  }
}

TEST(GenWhistleTest, EnvelopeAndEdgeCases) {
  const AudioBuffer w = GenWhistle(0.5, 3000.0, kRate, 2);
  EXPECT_EQ(w.samples.front(), 0.0);
  EXPECT_NEAR(w.samples.back(), 0.0, 1e-12);
  // Linear 10 ms attack: 2.5 ms in, the level is at most a quarter of 0.78.
  double early = 0.0;
  for (int i = 0; i < 40; ++i) early = std::max(early, std::abs(w.samples[i]));
  EXPECT_LE(early, 0.78 * 40.0 / 160.0);
  double settled = 0.0;
  for (int i = 160; i < 800; ++i) settled = std::max(settled, std::abs(w.samples[i]));
  EXPECT_GT(settled, 0.6);
  EXPECT_TRUE(GenWhistle(0.0, 3000.0, kRate, 2).samples.empty());
  EXPECT_EQ(GenWhistle(0.3, 3000.0, kRate, 5).samples,
            GenWhistle(0.3, 3000.0, kRate, 5).samples);
  EXPECT_HLIGHT_ERROR(GenWhistle(1.0, 8000.0, kRate, 1), ErrorCode::kInvalidArgument);
  EXPECT_HLIGHT_ERROR(GenWhistle(1.0, 0.0, kRate, 1), ErrorCode::kInvalidArgument);
}

TEST(GenSpeechLikeTest, ExcitedIsLouderBrighterAndHigher) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const AudioBuffer calm = GenSpeechLike(5.0, false, kRate, seed);
    const AudioBuffer hot = GenSpeechLike(5.0, true, kRate, seed);
    ASSERT_EQ(calm.samples.size(), hot.samples.size());
    // Mean frame energy, 25 ms frames.
    auto frame_energy = [](const std::vector<double>& x) {
      double e = 0.0;
      int n = 0;
      for (std::size_t s = 0; s + 400 <= x.size(); s += 400, ++n) {
        for (std::size_t i = s; i < s + 400; ++i) e += x[i] * x[i];
      }
      return e / n;
    };
    const double db = 10.0 * std::log10(frame_energy(hot.samples) / frame_energy(calm.samples));
    EXPECT_GE(db, 3.0) << seed;
    const auto pc = AveragePower(calm.samples, 0, calm.samples.size());
    const auto ph = AveragePower(hot.samples, 0, hot.samples.size());
    EXPECT_GT(Centroid(ph), Centroid(pc)) << seed;
  }
}

TEST(GenSpeechLikeTest, DeterministicAndBounded) {
  const AudioBuffer a = GenSpeechLike(2.0, true, kRate, 9);
  EXPECT_EQ(a.samples, GenSpeechLike(2.0, true, kRate, 9).samples);
  EXPECT_NE(a.samples, GenSpeechLike(2.0, true, kRate, 10).samples);
  ValidateAudioBuffer(a);
  EXPECT_HLIGHT_ERROR(GenSpeechLike(0.0, false, kRate, 1), ErrorCode::kInvalidArgument);
}

TEST(GenCrowdTest, FlatInBand) {
  const AudioBuffer c = GenCrowd(20.0, kRate, 4);
  const auto p = AveragePower(c.samples, 0, c.samples.size());
  const auto lo = static_cast<std::size_t>(std::ceil(200.0 / BinHz()));
  const auto hi = static_cast<std::size_t>(std::floor(4000.0 / BinHz()));
  const double mean =
      std::accumulate(p.begin() + lo, p.begin() + hi + 1, 0.0) / (hi - lo + 1);
  for (std::size_t k = lo; k <= hi; ++k) {
    EXPECT_LE(10.0 * std::log10(p[k] / mean), 12.0) << k * BinHz() << " Hz";
  }
  // Out of band content is strongly attenuated.
  const auto far = static_cast<std::size_t>(7000.0 / BinHz());
  EXPECT_LT(p[far], 1e-3 * mean);
  EXPECT_NEAR(Rms(c.samples), kReferenceRms, 1e-9);
}

TEST(GenCrowdTest, DeterministicAndEmpty) {
  EXPECT_EQ(GenCrowd(1.0, kRate, 3).samples, GenCrowd(1.0, kRate, 3).samples);
  EXPECT_TRUE(GenCrowd(0.0, kRate, 3).samples.empty());
  EXPECT_TRUE(GenMusic(0.0, kRate, 3).samples.empty());
}

TEST(GenMusicTest, HarmonicAndAtReferenceLevel) {
  const AudioBuffer m = GenMusic(4.0, kRate, 7);
  EXPECT_NEAR(Rms(m.samples), kReferenceRms, 1e-9);
  EXPECT_EQ(m.samples, GenMusic(4.0, kRate, 7).samples);
}

TEST(SynthKindTest, Names) {
  for (auto k : {SynthKind::kWhistle, SynthKind::kExcited, SynthKind::kUnexcited,
                 SynthKind::kCrowd, SynthKind::kMusic, SynthKind::kSilence}) {
    EXPECT_EQ(ParseSynthKind(SynthKindName(k)), k);
  }
  EXPECT_HLIGHT_ERROR(ParseSynthKind("tuba"), ErrorCode::kMalformedFile);
}

MatchScript ThreeWhistles(double snr_db) {
  MatchScript s;
  s.total_s = 30.0;
  s.seed = 5;
  s.snr_db = snr_db;
  for (double t : {3.0, 12.0, 21.0}) {
    s.events.push_back({t, 1.0, SynthKind::kWhistle, {{"f0_hz", 3200.0}}, "foul"});
  }
  return s;
}

TEST(RenderMatchTest, WhistleAnnotationsAndLength) {
  const RenderedMatch m = RenderMatch(ThreeWhistles(20.0));
  EXPECT_EQ(m.audio.samples.size(), 30u * kRate);
  ValidateAudioBuffer(m.audio);
  std::vector<AnnotatedInterval> whistles, scenes;
  for (const auto& iv : m.truth.intervals) {
    if (iv.kind == KeyEventKind(EventLabel::kWhistle)) whistles.push_back(iv);
    if (IsHighlightKind(iv.kind)) scenes.push_back(iv);
  }
  ASSERT_EQ(whistles.size(), 3u);
  EXPECT_EQ(whistles[0].start_s, 3.0);
  EXPECT_EQ(whistles[1].start_s, 12.0);
  EXPECT_EQ(whistles[2].end_s, 22.0);
  ASSERT_EQ(scenes.size(), 3u);
  EXPECT_EQ(scenes[0].kind, "foul");
}

TEST(RenderMatchTest, WhistleDominatesAtTwentyDb) {
  const RenderedMatch m = RenderMatch(ThreeWhistles(20.0));
  const auto p = AveragePower(m.audio.samples, 12 * kRate, 13 * kRate);
  EXPECT_LE(std::abs(PeakBin(p) * BinHz() - 3200.0), 2 * BinHz());
}

TEST(RenderMatchTest, GroupsNearbyKeyEventsIntoScenes) {
  MatchScript s;
  s.total_s = 60.0;
  s.events = {{5.0, 1.0, SynthKind::kWhistle, {}, "try"},
              {5.5, 6.0, SynthKind::kExcited, {}, "try"},
              {12.5, 1.0, SynthKind::kWhistle, {}, "other_highlight"},
              {30.0, 8.0, SynthKind::kUnexcited, {}, "other_highlight"},
              {45.0, 4.0, SynthKind::kExcited, {}, "penalty"}};
  const RenderedMatch m = RenderMatch(s);
  std::vector<AnnotatedInterval> scenes;
  for (const auto& iv : m.truth.intervals) {
    if (IsHighlightKind(iv.kind)) scenes.push_back(iv);
  }
  ASSERT_EQ(scenes.size(), 2u);
  EXPECT_EQ(scenes[0].start_s, 5.0);
  EXPECT_EQ(scenes[0].end_s, 13.5);  // 11.5 + 1 s gap joins the second whistle
  EXPECT_EQ(scenes[0].kind, "try");
  EXPECT_EQ(scenes[1].kind, "penalty");
  const auto unexcited = std::count_if(
      m.truth.intervals.begin(), m.truth.intervals.end(), [](const auto& iv) {
        return iv.kind == KeyEventKind(EventLabel::kUnexcitedSpeech);
      });
  EXPECT_EQ(unexcited, 1);
}

TEST(RenderMatchTest, SilenceMutesAndGainApplies) {
  MatchScript s;
  s.total_s = 4.0;
  s.events = {{1.0, 1.0, SynthKind::kSilence, {}, "other_highlight"}};
  const RenderedMatch m = RenderMatch(s);
  for (int i = kRate; i < 2 * kRate; ++i) ASSERT_EQ(m.audio.samples[i], 0.0);
  EXPECT_GT(Rms(std::vector<double>(m.audio.samples.begin(),
                                    m.audio.samples.begin() + kRate)), 0.0);
}

TEST(RenderMatchTest, DeterministicAndValidated) {
  const MatchScript s = ThreeWhistles(15.0);
  EXPECT_EQ(RenderMatch(s).audio.samples, RenderMatch(s).audio.samples);
  MatchScript bad = s;
  bad.events[0].start_s = 29.5;
  EXPECT_HLIGHT_ERROR(RenderMatch(bad), ErrorCode::kInvalidArgument);
  bad = s;
  bad.events[0].highlight = "goal";
  EXPECT_HLIGHT_ERROR(RenderMatch(bad), ErrorCode::kInvalidArgument);
}

TEST(ScriptFileTest, RoundTrip) {
  TempDir dir;
  const MatchScript s = MakeDemoMatchScript(120.0, 3, 4);
  SaveScript(dir.File("s.json"), s);
  const MatchScript back = LoadScript(dir.File("s.json"));
  EXPECT_EQ(ScriptToJson(back), ScriptToJson(s));
  EXPECT_EQ(RenderMatch(back).audio.samples, RenderMatch(s).audio.samples);
}

TEST(DemoScriptTest, ScenesAreSeparatedAndCommentaryStaysClear) {
  const MatchScript s = MakeDemoMatchScript(600.0, 8, 11);
  const RenderedMatch m = RenderMatch(s);
  std::vector<AnnotatedInterval> scenes;
  for (const auto& iv : m.truth.intervals) {
    if (IsHighlightKind(iv.kind)) scenes.push_back(iv);
  }
  ASSERT_EQ(scenes.size(), 8u);
  EXPECT_EQ(std::count_if(scenes.begin(), scenes.end(),
                          [](const auto& iv) { return iv.kind == "try"; }),
            4);
  for (const auto& e : s.events) {
    if (e.kind != SynthKind::kUnexcited) continue;
    for (const auto& sc : scenes) {
      EXPECT_TRUE(e.start_s + e.dur_s <= sc.start_s || e.start_s >= sc.end_s);
    }
  }
}

TEST(CategoryClipTest, DeterministicLevels) {
  for (EventLabel l : kAllLabels) {
    const AudioBuffer a = RenderCategoryClip(l, 3.0, 8);
    EXPECT_EQ(a.samples, RenderCategoryClip(l, 3.0, 8).samples);
    EXPECT_EQ(a.samples.size(), 3u * kRate);
    ValidateAudioBuffer(a);
  }
  const AudioBuffer o = RenderOverlapClip(3.0, 8);
  ValidateAudioBuffer(o);
  // Whistle energy sits on top of the speech clip with the same seed.
  EXPECT_GT(Rms(o.samples),
            Rms(RenderCategoryClip(EventLabel::kExcitedSpeech, 3.0, 8).samples));
}

}  // namespace
}  // namespace hlight
