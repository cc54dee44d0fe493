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

#include "hlight/classifier.h"

#include <algorithm>
#include <array>
#include <fstream>

#include "hlight/error.h"

namespace hlight {
namespace {

constexpr std::array<const char*, 5> kRoles = {"speech", "excited", "unexcited",
                                               "whistle", "others"};

std::array<const GmmModel*, 5> Models(const ModelBank& bank) {
  return {&bank.speech, &bank.excited, &bank.unexcited, &bank.whistle,
          &bank.others};
}

std::array<GmmModel*, 5> Models(ModelBank& bank) {
  return {&bank.speech, &bank.excited, &bank.unexcited, &bank.whistle,
          &bank.others};
}

std::size_t LabelIndex(EventLabel label) { return static_cast<std::size_t>(label); }

EventLabel Vote(std::span<const EventLabel> window, EventLabel own) {
  std::array<int, 4> counts{};
  for (EventLabel l : window) ++counts[LabelIndex(l)];
  const int best = *std::max_element(counts.begin(), counts.end());
  int winners = 0;
  EventLabel winner = own;
  for (EventLabel l : kAllLabels) {
    if (counts[LabelIndex(l)] == best) {
      ++winners;
      winner = l;
    }
  }
  return winners == 1 ? winner : own;
}

}  // namespace

std::string_view LabelName(EventLabel label) {
  switch (label) {
    case EventLabel::kExcitedSpeech:
      return "excited_speech";
    case EventLabel::kUnexcitedSpeech:
      return "unexcited_speech";
    case EventLabel::kWhistle:
      return "whistle";
    case EventLabel::kOthers:
      return "others";
  }
  return "others";
}

std::optional<EventLabel> ParseLabel(std::string_view name) {
  for (EventLabel l : kAllLabels) {
    if (LabelName(l) == name) return l;
  }
  return std::nullopt;
}

void ModelBank::Validate() const {
  feature_config.Validate(sample_rate);
  const auto models = Models(*this);
  for (std::size_t i = 0; i < models.size(); ++i) {
    models[i]->Validate();
    if (models[i]->dim != feature_config.Dimension()) {
      throw Error(ErrorCode::kInvariantViolation,
                  std::string("model '") + kRoles[i] + "' has dimension " +
                      std::to_string(models[i]->dim) + ", feature config gives " +
                      std::to_string(feature_config.Dimension()));
    }
  }
}

nlohmann::json BankToJson(const ModelBank& bank) {
  nlohmann::json models = nlohmann::json::object();
  const auto m = Models(bank);
  for (std::size_t i = 0; i < m.size(); ++i) models[kRoles[i]] = GmmToJson(*m[i]);
  return nlohmann::json{{"format", kBankFormatName},
                        {"version", kBankFormatVersion},
                        {"sample_rate", bank.sample_rate},
                        {"feature_config", FeatureConfigToJson(bank.feature_config)},
                        {"models", models}};
}

ModelBank BankFromJson(const nlohmann::json& j) {
  ModelBank bank;
  try {
    if (j.at("format").get<std::string>() != kBankFormatName) {
      throw Error(ErrorCode::kMalformedFile, "not a model bank");
    }
    const int version = j.at("version").get<int>();
    if (version != kBankFormatVersion) {
      throw Error(ErrorCode::kMalformedFile,
                  "unsupported bank version " + std::to_string(version));
    }
    bank.sample_rate = j.at("sample_rate").get<int>();
    bank.feature_config = FeatureConfigFromJson(j.at("feature_config"));
    const auto& models = j.at("models");
    auto m = Models(bank);
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (!models.contains(kRoles[i])) {
        throw Error(ErrorCode::kMalformedFile,
                    std::string("bank lacks the '") + kRoles[i] + "' model");
      }
      *m[i] = GmmFromJson(models.at(kRoles[i]));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kMalformedFile, e.what());
  }
  bank.Validate();
  return bank;
}

void SaveBank(const std::string& path, const ModelBank& bank) {
  bank.Validate();
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot open " + path);
  out << BankToJson(bank).dump(1) << "\n";
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path);
}

ModelBank LoadBank(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kFileNotFound, path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kMalformedFile, path + ": " + e.what());
  }
  return BankFromJson(j);
}

BankClassifier::BankClassifier(const ModelBank& bank,
                               const ClassifierConfig& config)
    : dim_(bank.speech.dim),
      bias_speech_(config.bias_speech),
      speech_(bank.speech),
      excited_(bank.excited),
      unexcited_(bank.unexcited),
      whistle_(bank.whistle),
      others_(bank.others) {
  for (const GmmModel* m : Models(bank)) {
    if (m->dim != dim_) {
      throw Error(ErrorCode::kDimensionMismatch, "bank models disagree on dimension");
    }
  }
}

FrameDecision BankClassifier::Classify(std::span<const double> c) const {
  if (static_cast<int>(c.size()) != dim_) {
    throw Error(ErrorCode::kDimensionMismatch,
                "vector of dimension " + std::to_string(c.size()) +
                    " for a bank of dimension " + std::to_string(dim_));
  }
  const double ll_speech = speech_.LogLikelihood(c);
  const double ll_whistle = whistle_.LogLikelihood(c);
  const double ll_others = others_.LogLikelihood(c);
  FrameDecision d;
  d.stage1_margin = ll_speech - std::max(ll_whistle, ll_others);
  if (ll_speech + bias_speech_ >= std::max(ll_whistle, ll_others)) {
    d.stage2_margin = excited_.LogLikelihood(c) - unexcited_.LogLikelihood(c);
    d.label = d.stage2_margin >= 0.0 ? EventLabel::kExcitedSpeech
                                     : EventLabel::kUnexcitedSpeech;
  } else {
    d.stage2_margin = ll_whistle - ll_others;
    d.label = d.stage2_margin >= 0.0 ? EventLabel::kWhistle : EventLabel::kOthers;
  }
  return d;
}

FrameDecision ClassifyFrame(const ModelBank& bank, std::span<const double> c,
                            double bias_speech) {
  ClassifierConfig config;
  config.bias_speech = bias_speech;
  return BankClassifier(bank, config).Classify(c);
}

std::vector<EventLabel> SmoothLabels(std::span<const EventLabel> labels,
                                     int smooth_frames) {
  std::vector<EventLabel> out(labels.begin(), labels.end());
  const std::ptrdiff_t half = std::max(smooth_frames, 1) / 2;
  if (half == 0) return out;
  const auto n = static_cast<std::ptrdiff_t>(labels.size());
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, i - half);
    const std::ptrdiff_t hi = std::min(n - 1, i + half);
    out[static_cast<std::size_t>(i)] =
        Vote(labels.subspan(static_cast<std::size_t>(lo),
                            static_cast<std::size_t>(hi - lo + 1)),
             labels[static_cast<std::size_t>(i)]);
  }
  return out;
}

LabelSmoother::LabelSmoother(int smooth_frames)
    : half_(std::max(smooth_frames, 1) / 2) {}

void LabelSmoother::Push(const LabeledFrame& frame,
                         std::vector<LabeledFrame>* out) {
  buffer_.push_back(frame);
  ++received_;
  while (next_emit_ + static_cast<std::size_t>(half_) < received_) EmitOne(out);
}

void LabelSmoother::Finish(std::vector<LabeledFrame>* out) {
  while (next_emit_ < received_) EmitOne(out);
}

void LabelSmoother::EmitOne(std::vector<LabeledFrame>* out) {
  const std::size_t i = next_emit_;
  const auto half = static_cast<std::size_t>(half_);
  const std::size_t lo = i > half ? i - half : 0;
  const std::size_t hi = std::min(received_ - 1, i + half);
  std::vector<EventLabel> window;
  window.reserve(hi - lo + 1);
  for (std::size_t k = lo; k <= hi; ++k) window.push_back(buffer_[k - first_index_].label);
  LabeledFrame f = buffer_[i - first_index_];
  f.label = Vote(window, f.label);
  out->push_back(f);
  ++next_emit_;
  while (first_index_ + half < next_emit_ && !buffer_.empty()) {
    buffer_.pop_front();
    ++first_index_;
  }
}

std::vector<LabeledFrame> ClassifySequence(const ModelBank& bank,
                                           const FeatureSequence& features,
                                           const ClassifierConfig& config) {
  const BankClassifier classifier(bank, config);
  std::vector<LabeledFrame> raw;
  raw.reserve(features.size());
  for (std::size_t i = 0; i < features.size(); ++i) {
    const FrameDecision d = classifier.Classify(features.vectors[i]);
    raw.push_back({features.timestamps[i], d.label, d.stage1_margin, d.stage2_margin});
  }
  std::vector<LabeledFrame> out;
  out.reserve(raw.size());
  LabelSmoother smoother(config.smooth_frames);
  for (const auto& f : raw) smoother.Push(f, &out);
  smoother.Finish(&out);
  return out;
}

BankTrainingReport TrainBank(const LabeledCorpus& corpus,
                             const EmOptions& options) {
  const FeatureConfig* config = nullptr;
  int sample_rate = 0;
  std::array<DataSet, 4> per_label;
  for (EventLabel l : kAllLabels) {
    auto it = corpus.find(l);
    if (it != corpus.end()) {
      for (const auto& seq : it->second) {
        if (config == nullptr) {
          config = &seq.config;
          sample_rate = seq.sample_rate;
        } else if (!(seq.config == *config) || seq.sample_rate != sample_rate) {
          throw Error(ErrorCode::kConfigMismatch,
                      "corpus sequences use different feature configs");
        }
        auto& dst = per_label[LabelIndex(l)];
        dst.insert(dst.end(), seq.vectors.begin(), seq.vectors.end());
      }
    }
    if (per_label[LabelIndex(l)].empty()) {
      throw Error(ErrorCode::kMissingCategory,
                  std::string("no training data for '") + std::string(LabelName(l)) + "'");
    }
  }

  DataSet speech = per_label[LabelIndex(EventLabel::kExcitedSpeech)];
  const auto& unexcited = per_label[LabelIndex(EventLabel::kUnexcitedSpeech)];
  speech.insert(speech.end(), unexcited.begin(), unexcited.end());

  const std::array<const DataSet*, 5> sets = {
      &speech, &per_label[LabelIndex(EventLabel::kExcitedSpeech)], &unexcited,
      &per_label[LabelIndex(EventLabel::kWhistle)],
      &per_label[LabelIndex(EventLabel::kOthers)]};

  BankTrainingReport report;
  report.bank.feature_config = *config;
  report.bank.sample_rate = sample_rate;
  auto models = Models(report.bank);
  for (std::size_t i = 0; i < sets.size(); ++i) {
    EmOptions opts = options;
    opts.seed = options.seed + i;
    EmResult r = TrainEm(*sets[i], opts);
    r.model.label = kRoles[i];
    *models[i] = std::move(r.model);
    report.final_mean_log_likelihood[kRoles[i]] = r.mean_log_likelihood.back();
    report.training_vectors[kRoles[i]] = sets[i]->size();
  }
  report.bank.Validate();
  return report;
}

nlohmann::json LabeledFrameToJson(const LabeledFrame& frame) {
  return nlohmann::json{{"t", frame.t},
                        {"label", LabelName(frame.label)},
                        {"m1", frame.stage1_margin},
                        {"m2", frame.stage2_margin}};
}

}  // namespace hlight
