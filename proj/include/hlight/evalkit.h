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

#ifndef HLIGHT_EVALKIT_H_
#define HLIGHT_EVALKIT_H_

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hlight/classifier.h"
#include "hlight/segmenter.h"
#include "json.hpp"

namespace hlight {

// Scene-level truth kinds. Event-level truth uses "key_event:<label>" with
// a classifier label name, e.g. "key_event:whistle".
inline constexpr const char* kHighlightKinds[] = {
    "try", "foul", "penalty", "defense_foil", "interception", "other_highlight"};
inline constexpr std::string_view kKeyEventPrefix = "key_event:";

bool IsHighlightKind(std::string_view kind);
bool IsValidKind(std::string_view kind);
std::string KeyEventKind(EventLabel label);

struct AnnotatedInterval {
  double start_s = 0.0;
  double end_s = 0.0;
  std::string kind;

  bool operator==(const AnnotatedInterval&) const = default;
};

struct Annotation {
  std::vector<AnnotatedInterval> intervals;

  // start < end for every interval, known kinds, and no overlap between two
  // intervals of the same kind (touching is allowed). kInvalidArgument.
  void Validate() const;
  bool operator==(const Annotation&) const = default;
};

// One JSON object per line: {"start_s": .., "end_s": .., "kind": ".."}.
Annotation LoadAnnotations(const std::string& path);
void SaveAnnotations(const std::string& path, const Annotation& annotation);

// Undefined ratios (zero denominators) are nullopt rather than 0.
struct PrecisionRecall {
  std::optional<double> precision;
  std::optional<double> recall;
};

PrecisionRecall ComputePrecisionRecall(long long tp, long long fp, long long fn);

struct TimeInterval {
  double start_s = 0.0;
  double end_s = 0.0;
};

double OverlapSeconds(const TimeInterval& a, const TimeInterval& b);
// Positive overlap of at least overlap_s.
bool IntervalsMatch(const TimeInterval& a, const TimeInterval& b,
                    double overlap_s);

struct KindRecall {
  std::size_t total = 0;
  std::size_t recalled = 0;

  std::optional<double> recall() const;
};

struct MatchResult {
  std::size_t tp = 0;  // detected intervals matching some truth interval
  std::size_t fp = 0;
  std::size_t fn = 0;  // truth intervals matched by no detection
  std::size_t detected = 0;
  std::size_t truth = 0;
  std::map<std::string, KindRecall> per_kind;

  PrecisionRecall Rates() const;
};

// Generic interval matching; each truth interval is counted once no matter
// how many detections cover it.
MatchResult MatchIntervals(const std::vector<TimeInterval>& detected,
                           const std::vector<TimeInterval>& truth,
                           double overlap_s);

// Scene-level evaluation against the highlight kinds of `truth`, using the
// padded scene bounds. per_kind reports recall for every kind in `truth`,
// key events included.
MatchResult MatchScenes(const std::vector<HighlightScene>& detected,
                        const Annotation& truth, double overlap_s = 1.0);

// Runs of consecutive frames whose label is in `labels`, as
// [first.t, last.t + hop_s] intervals.
std::vector<TimeInterval> FramesToEvents(const std::vector<LabeledFrame>& frames,
                                         const std::vector<EventLabel>& labels,
                                         double hop_s);

// Event-level rows: "speech" (either speech label), "excited_speech" and
// "whistle", each matched against the corresponding key_event truth. Rows
// with no truth intervals are omitted.
std::map<std::string, MatchResult> EvaluateEvents(
    const std::vector<LabeledFrame>& frames, const Annotation& truth,
    double hop_s, double overlap_s = 1.0);

nlohmann::json MatchResultToJson(const MatchResult& result);
// Text tables laid out like a recall/precision report: event rows (may be
// empty) then the scene-level summary.
std::string FormatMetricsReport(const std::map<std::string, MatchResult>& events,
                                const MatchResult& scenes);

}  // namespace hlight

#endif  // HLIGHT_EVALKIT_H_
