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

#ifndef HLIGHT_SEGMENTER_H_
#define HLIGHT_SEGMENTER_H_

#include <cstddef>
#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "hlight/classifier.h"
#include "json.hpp"

namespace hlight {

struct WindowConfig {
  double window_s = 4.0;
  // Minimum fraction of key-event frames in a decision window.
  double threshold_pct = 0.5;
  double margin_s = 3.0;
  // Optional reporting filter on core (pre-margin) scene duration.
  std::optional<double> min_scene_s;
  std::optional<double> max_scene_s;

  void Validate() const;
  bool operator==(const WindowConfig&) const = default;
};

// Typical broadcast highlight lengths, handy values for the duration filter.
inline constexpr double kTypicalMinSceneS = 10.0;
inline constexpr double kTypicalMaxSceneS = 20.0;

struct HighlightScene {
  double start_s = 0.0;  // padded bounds
  double end_s = 0.0;
  double core_start_s = 0.0;  // bounds found by the decision window
  double core_end_s = 0.0;
  double key_event_fraction = 0.0;  // of the window that opened the scene
  int n_whistle = 0;
  int n_excited = 0;

  bool operator==(const HighlightScene&) const = default;
};

// round(window_s / hop_s), at least 1.
int WindowFrames(double window_s, double hop_s);

// Decision-window scan over a stream of labeled frames.
//
// With W frames per window: the first window [i, i+W) whose key-event
// fraction reaches the threshold opens a scene at frame i. The window then
// slides one frame at a time while it still meets the threshold; at the
// first window j that fails, the scene ends with the last frame of window
// j-1, i.e. frame j+W-2, and scanning resumes at the frame after it.
// Windows running past the end of the stream are never evaluated.
//
// Memory is one window of labels regardless of stream length.
class OnlineSegmenter {
 public:
  OnlineSegmenter(int window_frames, double threshold_pct, double hop_s);

  void Push(const LabeledFrame& frame, std::vector<HighlightScene>* out);
  void Finish(std::vector<HighlightScene>* out);

 private:
  struct Slot {
    double t;
    bool whistle;
    bool excited;
  };

  bool Meets() const;
  void PopFront();
  void Close(std::vector<HighlightScene>* out);

  int window_;
  double threshold_;
  double hop_s_;
  std::deque<Slot> buffer_;
  int buf_whistle_ = 0;
  int buf_excited_ = 0;
  long long total_whistle_ = 0;
  long long total_excited_ = 0;
  double last_popped_t_ = 0.0;

  bool in_scene_ = false;
  double onset_t_ = 0.0;
  double onset_fraction_ = 0.0;
  long long onset_whistle_ = 0;
  long long onset_excited_ = 0;
};

// Batch scan over a uniformly spaced frame list. The hop is inferred from
// the timestamps; fewer than two frames yields no scenes. Non-uniform or
// non-increasing timestamps throw kMalformedInput.
std::vector<HighlightScene> DetectHighlights(
    const std::vector<LabeledFrame>& frames, const WindowConfig& config);

std::vector<HighlightScene> DetectHighlights(
    const std::vector<LabeledFrame>& frames, const WindowConfig& config,
    double hop_s);

// Pads each scene by margin_s, clamps to [0, media_duration_s] and merges
// scenes whose padded intervals touch or overlap. Merged scenes sum their
// counts and keep the larger opening fraction.
std::vector<HighlightScene> ApplyMargins(
    const std::vector<HighlightScene>& scenes, double margin_s,
    double media_duration_s);

// Keeps scenes whose core duration lies within the given bounds.
std::vector<HighlightScene> FilterSceneDurations(
    const std::vector<HighlightScene>& scenes, std::optional<double> min_s,
    std::optional<double> max_s);

nlohmann::json ScenesToJson(const std::vector<HighlightScene>& scenes);
std::vector<HighlightScene> ScenesFromJson(const nlohmann::json& j);
void SaveScenes(const std::string& path, const std::vector<HighlightScene>& scenes);
std::vector<HighlightScene> LoadScenes(const std::string& path);

// "HH:MM:SS.mmm".
std::string FormatTimecode(double seconds);
// One "start end" timecode pair per scene.
std::string EdlText(const std::vector<HighlightScene>& scenes);

}  // namespace hlight

#endif  // HLIGHT_SEGMENTER_H_
