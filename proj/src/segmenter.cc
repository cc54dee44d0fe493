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

#include "hlight/segmenter.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "hlight/error.h"

namespace hlight {

void WindowConfig::Validate() const {
  if (!(window_s > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "window_s must be positive");
  }
  if (!(threshold_pct > 0.0) || threshold_pct > 1.0) {
    throw Error(ErrorCode::kInvalidArgument, "threshold_pct must be in (0, 1]");
  }
  if (!(margin_s >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "margin_s must be non-negative");
  }
  if (min_scene_s && max_scene_s && *min_scene_s > *max_scene_s) {
    throw Error(ErrorCode::kInvalidArgument, "min_scene_s exceeds max_scene_s");
  }
}

int WindowFrames(double window_s, double hop_s) {
  if (!(hop_s > 0.0) || !(window_s > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "window and hop must be positive");
  }
  return std::max(1, static_cast<int>(std::lround(window_s / hop_s)));
}

OnlineSegmenter::OnlineSegmenter(int window_frames, double threshold_pct,
                                 double hop_s)
    : window_(window_frames), threshold_(threshold_pct), hop_s_(hop_s) {
  if (window_frames < 1) {
    throw Error(ErrorCode::kInvalidArgument, "window must hold at least one frame");
  }
  if (!(threshold_pct > 0.0) || threshold_pct > 1.0) {
    throw Error(ErrorCode::kInvalidArgument, "threshold_pct must be in (0, 1]");
  }
}

bool OnlineSegmenter::Meets() const {
  return static_cast<double>(buf_whistle_ + buf_excited_) / window_ >= threshold_;
}

void OnlineSegmenter::Push(const LabeledFrame& frame,
                           std::vector<HighlightScene>* out) {
  const Slot slot{frame.t, frame.label == EventLabel::kWhistle,
                  frame.label == EventLabel::kExcitedSpeech};
  buffer_.push_back(slot);
  buf_whistle_ += slot.whistle;
  buf_excited_ += slot.excited;
  total_whistle_ += slot.whistle;
  total_excited_ += slot.excited;

  while (static_cast<int>(buffer_.size()) == window_) {
    if (!in_scene_) {
      if (Meets()) {
        in_scene_ = true;
        onset_t_ = buffer_.front().t;
        onset_fraction_ = static_cast<double>(buf_whistle_ + buf_excited_) / window_;
        onset_whistle_ = total_whistle_ - buf_whistle_;
        onset_excited_ = total_excited_ - buf_excited_;
      }
      PopFront();
    } else if (Meets()) {
      PopFront();
    } else {
      // Window [p, p+W) fails: the scene ends at frame p+W-2 and scanning
      // restarts at p+W-1, the newest frame.
      Close(out);
      while (buffer_.size() > 1) PopFront();
    }
  }
}

void OnlineSegmenter::PopFront() {
  last_popped_t_ = buffer_.front().t;
  buf_whistle_ -= buffer_.front().whistle;
  buf_excited_ -= buffer_.front().excited;
  buffer_.pop_front();
}

void OnlineSegmenter::Close(std::vector<HighlightScene>* out) {
  const Slot& newest = buffer_.back();
  const double end_t =
      buffer_.size() >= 2 ? buffer_[buffer_.size() - 2].t : last_popped_t_;
  HighlightScene scene;
  scene.core_start_s = onset_t_;
  scene.core_end_s = end_t + hop_s_;
  scene.start_s = scene.core_start_s;
  scene.end_s = scene.core_end_s;
  scene.key_event_fraction = onset_fraction_;
  scene.n_whistle =
      static_cast<int>(total_whistle_ - newest.whistle - onset_whistle_);
  scene.n_excited =
      static_cast<int>(total_excited_ - newest.excited - onset_excited_);
  out->push_back(scene);
  in_scene_ = false;
}

void OnlineSegmenter::Finish(std::vector<HighlightScene>* out) {
  if (!in_scene_) return;
  // Every arrived frame is covered by the last satisfying window.
  HighlightScene scene;
  scene.core_start_s = onset_t_;
  scene.core_end_s = buffer_.back().t + hop_s_;
  scene.start_s = scene.core_start_s;
  scene.end_s = scene.core_end_s;
  scene.key_event_fraction = onset_fraction_;
  scene.n_whistle = static_cast<int>(total_whistle_ - onset_whistle_);
  scene.n_excited = static_cast<int>(total_excited_ - onset_excited_);
  out->push_back(scene);
  in_scene_ = false;
}

std::vector<HighlightScene> DetectHighlights(
    const std::vector<LabeledFrame>& frames, const WindowConfig& config) {
  if (frames.size() < 2) return {};
  return DetectHighlights(frames, config, frames[1].t - frames[0].t);
}

std::vector<HighlightScene> DetectHighlights(
    const std::vector<LabeledFrame>& frames, const WindowConfig& config,
    double hop_s) {
  config.Validate();
  if (frames.empty()) return {};
  if (!(hop_s > 0.0)) {
    throw Error(ErrorCode::kMalformedInput, "timestamps must strictly increase");
  }
  const double t0 = frames[0].t;
  for (std::size_t i = 1; i < frames.size(); ++i) {
    const double expected = t0 + static_cast<double>(i) * hop_s;
    if (std::abs(frames[i].t - expected) > 1e-6 + 1e-9 * std::abs(expected)) {
      throw Error(ErrorCode::kMalformedInput,
                  "frame " + std::to_string(i) + " at t=" +
                      std::to_string(frames[i].t) + " breaks the uniform hop");
    }
  }
  OnlineSegmenter seg(WindowFrames(config.window_s, hop_s), config.threshold_pct,
                      hop_s);
  std::vector<HighlightScene> out;
  for (const auto& f : frames) seg.Push(f, &out);
  seg.Finish(&out);
  return out;
}

std::vector<HighlightScene> ApplyMargins(
    const std::vector<HighlightScene>& scenes, double margin_s,
    double media_duration_s) {
  std::vector<HighlightScene> out;
  for (HighlightScene s : scenes) {
    s.start_s = std::clamp(s.core_start_s - margin_s, 0.0, media_duration_s);
    s.end_s = std::clamp(s.core_end_s + margin_s, 0.0, media_duration_s);
    if (!out.empty() && s.start_s <= out.back().end_s) {
      HighlightScene& prev = out.back();
      prev.end_s = std::max(prev.end_s, s.end_s);
      prev.core_end_s = std::max(prev.core_end_s, s.core_end_s);
      prev.core_start_s = std::min(prev.core_start_s, s.core_start_s);
      prev.key_event_fraction = std::max(prev.key_event_fraction, s.key_event_fraction);
      prev.n_whistle += s.n_whistle;
      prev.n_excited += s.n_excited;
    } else {
      out.push_back(s);
    }
  }
  return out;
}

std::vector<HighlightScene> FilterSceneDurations(
    const std::vector<HighlightScene>& scenes, std::optional<double> min_s,
    std::optional<double> max_s) {
  std::vector<HighlightScene> out;
  for (const auto& s : scenes) {
    const double d = s.core_end_s - s.core_start_s;
    if (min_s && d < *min_s) continue;
    if (max_s && d > *max_s) continue;
    out.push_back(s);
  }
  return out;
}

nlohmann::json ScenesToJson(const std::vector<HighlightScene>& scenes) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& s : scenes) {
    arr.push_back({{"start_s", s.start_s},
                   {"end_s", s.end_s},
                   {"core_start_s", s.core_start_s},
                   {"core_end_s", s.core_end_s},
                   {"key_event_fraction", s.key_event_fraction},
                   {"n_whistle", s.n_whistle},
                   {"n_excited", s.n_excited}});
  }
  return arr;
}

std::vector<HighlightScene> ScenesFromJson(const nlohmann::json& j) {
  if (!j.is_array()) {
    throw Error(ErrorCode::kMalformedFile, "highlight list is not an array");
  }
  std::vector<HighlightScene> out;
  try {
    for (const auto& e : j) {
      HighlightScene s;
      s.start_s = e.at("start_s").get<double>();
      s.end_s = e.at("end_s").get<double>();
      s.core_start_s = e.value("core_start_s", s.start_s);
      s.core_end_s = e.value("core_end_s", s.end_s);
      s.key_event_fraction = e.value("key_event_fraction", 0.0);
      s.n_whistle = e.value("n_whistle", 0);
      s.n_excited = e.value("n_excited", 0);
      if (!(s.start_s < s.end_s)) {
        throw Error(ErrorCode::kMalformedFile, "scene with start >= end");
      }
      out.push_back(s);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kMalformedFile, e.what());
  }
  return out;
}

void SaveScenes(const std::string& path,
                const std::vector<HighlightScene>& scenes) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot open " + path);
  out << ScenesToJson(scenes).dump(1) << "\n";
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path);
}

std::vector<HighlightScene> LoadScenes(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kFileNotFound, path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kMalformedFile, path + ": " + e.what());
  }
  return ScenesFromJson(j);
}

std::string FormatTimecode(double seconds) {
  const long long ms = std::llround(std::max(0.0, seconds) * 1000.0);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%02lld:%02lld:%02lld.%03lld", ms / 3600000,
                (ms / 60000) % 60, (ms / 1000) % 60, ms % 1000);
  return buf;
}

std::string EdlText(const std::vector<HighlightScene>& scenes) {
  std::string out;
  for (const auto& s : scenes) {
    out += FormatTimecode(s.start_s) + " " + FormatTimecode(s.end_s) + "\n";
  }
  return out;
}

}  // namespace hlight
