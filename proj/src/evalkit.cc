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

#include "hlight/evalkit.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "hlight/error.h"

namespace hlight {
namespace {

std::string Percent(const std::optional<double>& v) {
  if (!v) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f%%", *v * 100.0);
  return buf;
}

nlohmann::json Optional(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace

bool IsHighlightKind(std::string_view kind) {
  return std::any_of(std::begin(kHighlightKinds), std::end(kHighlightKinds),
                     [&](const char* k) { return kind == k; });
}

bool IsValidKind(std::string_view kind) {
  if (IsHighlightKind(kind)) return true;
  if (kind.substr(0, kKeyEventPrefix.size()) != kKeyEventPrefix) return false;
  return ParseLabel(kind.substr(kKeyEventPrefix.size())).has_value();
}

std::string KeyEventKind(EventLabel label) {
  return std::string(kKeyEventPrefix) + std::string(LabelName(label));
}

void Annotation::Validate() const {
  std::map<std::string, std::vector<const AnnotatedInterval*>> by_kind;
  for (const auto& iv : intervals) {
    if (!std::isfinite(iv.start_s) || !std::isfinite(iv.end_s) ||
        !(iv.start_s < iv.end_s)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "interval [" + std::to_string(iv.start_s) + ", " +
                      std::to_string(iv.end_s) + "] needs start < end");
    }
    if (!IsValidKind(iv.kind)) {
      throw Error(ErrorCode::kInvalidArgument, "unknown kind '" + iv.kind + "'");
    }
    by_kind[iv.kind].push_back(&iv);
  }
  for (auto& [kind, list] : by_kind) {
    std::sort(list.begin(), list.end(),
              [](auto* a, auto* b) { return a->start_s < b->start_s; });
    for (std::size_t i = 1; i < list.size(); ++i) {
      if (list[i]->start_s < list[i - 1]->end_s) {
        throw Error(ErrorCode::kInvalidArgument,
                    "overlapping '" + kind + "' intervals at " +
                        std::to_string(list[i]->start_s));
      }
    }
  }
}

Annotation LoadAnnotations(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kFileNotFound, path);
  Annotation a;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      AnnotatedInterval iv;
      iv.start_s = j.at("start_s").get<double>();
      iv.end_s = j.at("end_s").get<double>();
      iv.kind = j.at("kind").get<std::string>();
      a.intervals.push_back(std::move(iv));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kMalformedFile,
                  path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  try {
    a.Validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::kMalformedFile, path + ": " + e.what());
  }
  return a;
}

void SaveAnnotations(const std::string& path, const Annotation& annotation) {
  annotation.Validate();
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot open " + path);
  for (const auto& iv : annotation.intervals) {
    out << nlohmann::json{{"start_s", iv.start_s},
                          {"end_s", iv.end_s},
                          {"kind", iv.kind}}
               .dump()
        << "\n";
  }
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path);
}

PrecisionRecall ComputePrecisionRecall(long long tp, long long fp, long long fn) {
  if (tp < 0 || fp < 0 || fn < 0) {
    throw Error(ErrorCode::kInvalidArgument, "counts must be non-negative");
  }
  PrecisionRecall pr;
  if (tp + fp > 0) pr.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  if (tp + fn > 0) pr.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  return pr;
}

double OverlapSeconds(const TimeInterval& a, const TimeInterval& b) {
  return std::max(0.0, std::min(a.end_s, b.end_s) - std::max(a.start_s, b.start_s));
}

bool IntervalsMatch(const TimeInterval& a, const TimeInterval& b,
                    double overlap_s) {
  const double ov = OverlapSeconds(a, b);
  return ov > 0.0 && ov >= overlap_s;
}

std::optional<double> KindRecall::recall() const {
  if (total == 0) return std::nullopt;
  return static_cast<double>(recalled) / static_cast<double>(total);
}

PrecisionRecall MatchResult::Rates() const {
  return ComputePrecisionRecall(static_cast<long long>(tp),
                                static_cast<long long>(fp),
                                static_cast<long long>(fn));
}

namespace {

// Marks, for every detected and every truth interval, whether it has a
// partner. Both lists are swept in start order; running maximum of truth
// end times bounds how far back a candidate can start.
void MarkMatches(const std::vector<TimeInterval>& detected,
                 const std::vector<TimeInterval>& truth, double overlap_s,
                 std::vector<char>* det_hit, std::vector<char>* truth_hit) {
  det_hit->assign(detected.size(), 0);
  truth_hit->assign(truth.size(), 0);
  std::vector<std::size_t> order(truth.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return truth[a].start_s < truth[b].start_s;
  });
  std::vector<double> starts(order.size());
  std::vector<double> max_end(order.size());
  for (std::size_t k = 0; k < order.size(); ++k) {
    starts[k] = truth[order[k]].start_s;
    max_end[k] = std::max(k > 0 ? max_end[k - 1] : -INFINITY, truth[order[k]].end_s);
  }
  for (std::size_t d = 0; d < detected.size(); ++d) {
    const auto& det = detected[d];
    // Candidates start before det.end_s.
    std::size_t k = static_cast<std::size_t>(
        std::lower_bound(starts.begin(), starts.end(), det.end_s) - starts.begin());
    while (k-- > 0) {
      if (max_end[k] <= det.start_s) break;
      const std::size_t t = order[k];
      if (IntervalsMatch(det, truth[t], overlap_s)) {
        (*det_hit)[d] = 1;
        (*truth_hit)[t] = 1;
      }
    }
  }
}

}  // namespace

MatchResult MatchIntervals(const std::vector<TimeInterval>& detected,
                           const std::vector<TimeInterval>& truth,
                           double overlap_s) {
  if (!(overlap_s >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "overlap_s must be non-negative");
  }
  std::vector<char> det_hit, truth_hit;
  MarkMatches(detected, truth, overlap_s, &det_hit, &truth_hit);
  MatchResult r;
  r.detected = detected.size();
  r.truth = truth.size();
  r.tp = static_cast<std::size_t>(std::count(det_hit.begin(), det_hit.end(), 1));
  r.fp = r.detected - r.tp;
  r.fn = r.truth - static_cast<std::size_t>(std::count(truth_hit.begin(), truth_hit.end(), 1));
  return r;
}

MatchResult MatchScenes(const std::vector<HighlightScene>& detected,
                        const Annotation& truth, double overlap_s) {
  std::vector<TimeInterval> det;
  det.reserve(detected.size());
  for (const auto& s : detected) det.push_back({s.start_s, s.end_s});

  std::vector<TimeInterval> all;
  std::vector<TimeInterval> scenes;
  for (const auto& iv : truth.intervals) {
    all.push_back({iv.start_s, iv.end_s});
    if (IsHighlightKind(iv.kind)) scenes.push_back({iv.start_s, iv.end_s});
  }
  MatchResult r = MatchIntervals(det, scenes, overlap_s);

  std::vector<char> det_hit, truth_hit;
  MarkMatches(det, all, overlap_s, &det_hit, &truth_hit);
  for (std::size_t i = 0; i < truth.intervals.size(); ++i) {
    KindRecall& kr = r.per_kind[truth.intervals[i].kind];
    ++kr.total;
    kr.recalled += truth_hit[i] ? 1 : 0;
  }
  return r;
}

std::vector<TimeInterval> FramesToEvents(const std::vector<LabeledFrame>& frames,
                                         const std::vector<EventLabel>& labels,
                                         double hop_s) {
  std::vector<TimeInterval> out;
  auto wanted = [&](EventLabel l) {
    return std::find(labels.begin(), labels.end(), l) != labels.end();
  };
  bool open = false;
  for (const auto& f : frames) {
    if (wanted(f.label)) {
      if (!open) {
        out.push_back({f.t, f.t + hop_s});
        open = true;
      } else {
        out.back().end_s = f.t + hop_s;
      }
    } else {
      open = false;
    }
  }
  return out;
}

std::map<std::string, MatchResult> EvaluateEvents(
    const std::vector<LabeledFrame>& frames, const Annotation& truth,
    double hop_s, double overlap_s) {
  struct Row {
    const char* name;
    std::vector<EventLabel> labels;
  };
  const std::vector<Row> rows = {
      {"speech", {EventLabel::kExcitedSpeech, EventLabel::kUnexcitedSpeech}},
      {"excited_speech", {EventLabel::kExcitedSpeech}},
      {"whistle", {EventLabel::kWhistle}}};
  std::map<std::string, MatchResult> out;
  for (const auto& row : rows) {
    std::vector<TimeInterval> truth_iv;
    for (const auto& iv : truth.intervals) {
      for (EventLabel l : row.labels) {
        if (iv.kind == KeyEventKind(l)) truth_iv.push_back({iv.start_s, iv.end_s});
      }
    }
    if (truth_iv.empty()) continue;
    out[row.name] = MatchIntervals(FramesToEvents(frames, row.labels, hop_s),
                                   truth_iv, overlap_s);
  }
  return out;
}

nlohmann::json MatchResultToJson(const MatchResult& result) {
  const PrecisionRecall pr = result.Rates();
  nlohmann::json per_kind = nlohmann::json::object();
  for (const auto& [kind, kr] : result.per_kind) {
    per_kind[kind] = {{"total", kr.total},
                      {"recalled", kr.recalled},
                      {"recall", Optional(kr.recall())}};
  }
  return nlohmann::json{{"tp", result.tp},
                        {"fp", result.fp},
                        {"fn", result.fn},
                        {"detected", result.detected},
                        {"truth", result.truth},
                        {"precision", Optional(pr.precision)},
                        {"recall", Optional(pr.recall)},
                        {"per_kind", per_kind}};
}

std::string FormatMetricsReport(const std::map<std::string, MatchResult>& events,
                                const MatchResult& scenes) {
  std::ostringstream os;
  char buf[256];
  if (!events.empty()) {
    os << "Acoustic event detection\n";
    std::snprintf(buf, sizeof(buf), "%-16s %12s %10s %14s\n", "Event category",
                  "# instances", "Recall", "Precision");
    os << buf;
    for (const auto& [name, r] : events) {
      const PrecisionRecall pr = r.Rates();
      std::snprintf(buf, sizeof(buf), "%-16s %12zu %10s %14s\n", name.c_str(),
                    r.truth, Percent(pr.recall).c_str(),
                    Percent(pr.precision).c_str());
      os << buf;
    }
    os << "\n";
  }
  os << "Highlight scenes\n";
  std::snprintf(buf, sizeof(buf), "%-16s %10s %10s %22s %18s\n", "Kind",
                "# events", "# detected", "# scenes generated", "# true scenes");
  os << buf;
  for (const auto& [kind, kr] : scenes.per_kind) {
    if (!IsHighlightKind(kind)) continue;
    std::snprintf(buf, sizeof(buf), "%-16s %10zu %10zu %22s %18s\n", kind.c_str(),
                  kr.total, kr.recalled, "", "");
    os << buf;
  }
  std::snprintf(buf, sizeof(buf), "%-16s %10zu %10zu %22zu %18zu\n", "Total",
                scenes.truth, scenes.truth - scenes.fn, scenes.detected, scenes.tp);
  os << buf;
  const PrecisionRecall pr = scenes.Rates();
  const auto it = scenes.per_kind.find("try");
  if (it != scenes.per_kind.end()) {
    os << "Try recall: " << Percent(it->second.recall()) << "\n";
  }
  os << "Scene recall: " << Percent(pr.recall) << "\n";
  os << "Highlights precision: " << Percent(pr.precision) << "\n";
  return os.str();
}

}  // namespace hlight
