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

#include "hlight/error.h"

#include <string>

namespace hlight {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kFileNotFound:
      return "file-not-found";
    case ErrorCode::kMalformedHeader:
      return "malformed-header";
    case ErrorCode::kUnsupportedCodec:
      return "unsupported-codec";
    case ErrorCode::kUnsupportedLayout:
      return "unsupported-layout";
    case ErrorCode::kInvalidArgument:
      return "invalid-argument";
    case ErrorCode::kTooShort:
      return "too-short";
    case ErrorCode::kDomain:
      return "domain-error";
    case ErrorCode::kDimensionMismatch:
      return "dimension-mismatch";
    case ErrorCode::kInsufficientData:
      return "insufficient-data";
    case ErrorCode::kNonFiniteInput:
      return "non-finite-input";
    case ErrorCode::kMalformedFile:
      return "malformed-file";
    case ErrorCode::kInvariantViolation:
      return "invariant-violation";
    case ErrorCode::kMissingCategory:
      return "missing-category";
    case ErrorCode::kMalformedInput:
      return "malformed-input";
    case ErrorCode::kConfigMismatch:
      return "config-mismatch";
    case ErrorCode::kIo:
      return "io-error";
  }
  return "unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
      code_(code) {}

}  // namespace hlight
