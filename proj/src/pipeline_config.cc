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

#include "hlight/pipeline_config.h"

#include <cmath>
#include <fstream>

#include "hlight/error.h"

namespace hlight {
namespace {

void RequireObject(const nlohmann::json& j, const std::string& what) {
  if (!j.is_object()) {
    throw Error(ErrorCode::kMalformedFile, what + " is not an object");
  }
}

[[noreturn]] void UnknownKey(const std::string& section, const std::string& key) {
  throw Error(ErrorCode::kMalformedFile,
              "unknown config key '" + section + "." + key + "'");
}

std::optional<double> OptionalDouble(const nlohmann::json& v) {
  if (v.is_null()) return std::nullopt;
  return v.get<double>();
}

nlohmann::json OptionalToJson(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace

void PipelineConfig::Validate() const {
  if (version != kPipelineConfigVersion) {
    throw Error(ErrorCode::kInvalidArgument,
                "unsupported config version " + std::to_string(version));
  }
  feature.Validate(kCanonicalSampleRate);
  if (gmm.num_components < 1) {
    throw Error(ErrorCode::kInvalidArgument, "gmm.num_components must be >= 1");
  }
  if (gmm.max_iters < 0) {
    throw Error(ErrorCode::kInvalidArgument, "gmm.max_iters must be >= 0");
  }
  if (!(gmm.rel_tol >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "gmm.rel_tol must be >= 0");
  }
  if (!(gmm.var_floor > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "gmm.var_floor must be > 0");
  }
  if (std::isnan(classifier.bias_speech)) {
    throw Error(ErrorCode::kInvalidArgument, "classifier.bias_speech is NaN");
  }
  if (classifier.smooth_frames < 0) {
    throw Error(ErrorCode::kInvalidArgument, "classifier.smooth_frames must be >= 0");
  }
  window.Validate();
}

nlohmann::json ConfigToJson(const PipelineConfig& c) {
  return nlohmann::json{
      {"version", c.version},
      {"feature", FeatureConfigToJson(c.feature)},
      {"gmm",
       {{"num_components", c.gmm.num_components},
        {"max_iters", c.gmm.max_iters},
        {"rel_tol", c.gmm.rel_tol},
        {"var_floor", c.gmm.var_floor},
        {"seed", c.gmm.seed}}},
      {"classifier",
       {{"bias_speech", c.classifier.bias_speech},
        {"smooth_frames", c.classifier.smooth_frames}}},
      {"window",
       {{"window_s", c.window.window_s},
        {"threshold_pct", c.window.threshold_pct},
        {"margin_s", c.window.margin_s},
        {"min_scene_s", OptionalToJson(c.window.min_scene_s)},
        {"max_scene_s", OptionalToJson(c.window.max_scene_s)}}},
      {"io",
       {{"corpus_dir", c.io.corpus_dir},
        {"bank", c.io.bank},
        {"audio", c.io.audio},
        {"highlights", c.io.highlights},
        {"edl", c.io.edl},
        {"labels", c.io.labels},
        {"features", c.io.features}}},
  };
}

PipelineConfig ConfigFromJson(const nlohmann::json& j) {
  PipelineConfig c;
  RequireObject(j, "config");
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "version") {
        c.version = value.get<int>();
      } else if (key == "feature") {
        c.feature = FeatureConfigFromJson(value);
      } else if (key == "gmm") {
        RequireObject(value, "gmm");
        for (const auto& [k, v] : value.items()) {
          if (k == "num_components") c.gmm.num_components = v.get<int>();
          else if (k == "max_iters") c.gmm.max_iters = v.get<int>();
          else if (k == "rel_tol") c.gmm.rel_tol = v.get<double>();
          else if (k == "var_floor") c.gmm.var_floor = v.get<double>();
          else if (k == "seed") c.gmm.seed = v.get<std::uint64_t>();
          else UnknownKey(key, k);
        }
      } else if (key == "classifier") {
        RequireObject(value, "classifier");
        for (const auto& [k, v] : value.items()) {
          if (k == "bias_speech") c.classifier.bias_speech = v.get<double>();
          else if (k == "smooth_frames") c.classifier.smooth_frames = v.get<int>();
          else UnknownKey(key, k);
        }
      } else if (key == "window") {
        RequireObject(value, "window");
        for (const auto& [k, v] : value.items()) {
          if (k == "window_s") c.window.window_s = v.get<double>();
          else if (k == "threshold_pct") c.window.threshold_pct = v.get<double>();
          else if (k == "margin_s") c.window.margin_s = v.get<double>();
          else if (k == "min_scene_s") c.window.min_scene_s = OptionalDouble(v);
          else if (k == "max_scene_s") c.window.max_scene_s = OptionalDouble(v);
          else UnknownKey(key, k);
        }
      } else if (key == "io") {
        RequireObject(value, "io");
        for (const auto& [k, v] : value.items()) {
          if (k == "corpus_dir") c.io.corpus_dir = v.get<std::string>();
          else if (k == "bank") c.io.bank = v.get<std::string>();
          else if (k == "audio") c.io.audio = v.get<std::string>();
          else if (k == "highlights") c.io.highlights = v.get<std::string>();
          else if (k == "edl") c.io.edl = v.get<std::string>();
          else if (k == "labels") c.io.labels = v.get<std::string>();
          else if (k == "features") c.io.features = v.get<std::string>();
          else UnknownKey(key, k);
        }
      } else {
        throw Error(ErrorCode::kMalformedFile, "unknown config section '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kMalformedFile, std::string("config: ") + e.what());
  }
  if (c.version != kPipelineConfigVersion) {
    throw Error(ErrorCode::kMalformedFile,
                "unsupported config version " + std::to_string(c.version));
  }
  return c;
}

PipelineConfig LoadConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kFileNotFound, path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kMalformedFile, path + ": " + e.what());
  }
  PipelineConfig c = ConfigFromJson(j);
  c.Validate();
  return c;
}

void SaveConfig(const std::string& path, const PipelineConfig& config) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot open " + path);
  out << ConfigToJson(config).dump(2) << "\n";
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path);
}

void ApplyOverride(PipelineConfig* config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  const auto dot = assignment.find('.');
  if (eq == std::string::npos || dot == std::string::npos || dot > eq) {
    throw Error(ErrorCode::kInvalidArgument,
                "override must look like section.key=value: '" + assignment + "'");
  }
  const std::string section = assignment.substr(0, dot);
  const std::string key = assignment.substr(dot + 1, eq - dot - 1);
  const std::string text = assignment.substr(eq + 1);

  nlohmann::json j = ConfigToJson(*config);
  if (!j.contains(section) || !j[section].is_object() || !j[section].contains(key)) {
    throw Error(ErrorCode::kInvalidArgument,
                "unknown config key '" + section + "." + key + "'");
  }
  nlohmann::json value = nlohmann::json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  j[section][key] = value;
  try {
    *config = ConfigFromJson(j);
  } catch (const Error& e) {
    throw Error(ErrorCode::kInvalidArgument,
                "bad value for " + section + "." + key + ": " + e.what());
  }
}

}  // namespace hlight
