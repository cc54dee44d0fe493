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

#ifndef HLIGHT_ERROR_H_
#define HLIGHT_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace hlight {

enum class ErrorCode {
  kFileNotFound,
  kMalformedHeader,
  kUnsupportedCodec,
  kUnsupportedLayout,
  kInvalidArgument,
  kTooShort,
  kDomain,
  kDimensionMismatch,
  kInsufficientData,
  kNonFiniteInput,
  kMalformedFile,
  kInvariantViolation,
  kMissingCategory,
  kMalformedInput,
  kConfigMismatch,
  kIo,
};

std::string_view ErrorCodeName(ErrorCode code);

// Every failure raised by the library carries one of the codes above so
// callers (and tests) can tell e.g. a missing file from a bad header.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace hlight

#endif  // HLIGHT_ERROR_H_
