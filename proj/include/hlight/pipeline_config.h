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

#ifndef HLIGHT_PIPELINE_CONFIG_H_
#define HLIGHT_PIPELINE_CONFIG_H_

#include <string>

#include "hlight/classifier.h"
#include "hlight/features.h"
#include "hlight/gmm.h"
#include "hlight/segmenter.h"
#include "json.hpp"

namespace hlight {

inline constexpr int kPipelineConfigVersion = 1;

// Default locations used when a command-line flag does not name a file.
// Empty means "not set".
struct IoPaths {
  std::string corpus_dir;
  std::string bank;
  std::string audio;
  std::string highlights;
  std::string edl;
  std::string labels;
  std::string features;

  bool operator==(const IoPaths&) const = default;
};

struct PipelineConfig {
  int version = kPipelineConfigVersion;
  FeatureConfig feature;
  EmOptions gmm;
  ClassifierConfig classifier;
  WindowConfig window;
  IoPaths io;

  // Throws kInvalidArgument naming the first bad field.
  void Validate() const;
  bool operator==(const PipelineConfig&) const = default;
};

nlohmann::json ConfigToJson(const PipelineConfig& config);
// Missing sections and keys keep their defaults; unknown keys, wrong types
// and unsupported versions throw kMalformedFile.
PipelineConfig ConfigFromJson(const nlohmann::json& j);
PipelineConfig LoadConfig(const std::string& path);
void SaveConfig(const std::string& path, const PipelineConfig& config);

// Applies "section.key=value". The value is read as JSON when it parses and
// as a plain string otherwise. Throws kInvalidArgument for unknown keys.
void ApplyOverride(PipelineConfig* config, const std::string& assignment);

}  // namespace hlight

#endif  // HLIGHT_PIPELINE_CONFIG_H_
