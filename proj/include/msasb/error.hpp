// Copyright 2026 The MSASB Vocoder Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace msasb {

enum class ErrorCode {
  kUnsupportedFormat,
  kCorruptHeader,
  kIoFailure,
  kBadMagic,
  kTruncatedFile,
  kParseFailure,
  kNegativeF0,
  kAudioTooShort,
  kInvalidConfig,
  kTooManyBands,
  kInvalidF0,
  kFrameShiftMismatch,
  kNonPositiveInput,
  kNonPositiveEnvelope,
  kLengthMismatch,
  kFrameCountMismatch,
  kLogDomainMismatch,
  kGridMismatch,
};

constexpr std::string_view ErrorName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kUnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::kCorruptHeader: return "CorruptHeader";
    case ErrorCode::kIoFailure: return "IoFailure";
    case ErrorCode::kBadMagic: return "BadMagic";
    case ErrorCode::kTruncatedFile: return "TruncatedFile";
    case ErrorCode::kParseFailure: return "ParseFailure";
    case ErrorCode::kNegativeF0: return "NegativeF0";
    case ErrorCode::kAudioTooShort: return "AudioTooShort";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kTooManyBands: return "TooManyBands";
    case ErrorCode::kInvalidF0: return "InvalidF0";
    case ErrorCode::kFrameShiftMismatch: return "FrameShiftMismatch";
    case ErrorCode::kNonPositiveInput: return "NonPositiveInput";
    case ErrorCode::kNonPositiveEnvelope: return "NonPositiveEnvelope";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kFrameCountMismatch: return "FrameCountMismatch";
    case ErrorCode::kLogDomainMismatch: return "LogDomainMismatch";
    case ErrorCode::kGridMismatch: return "GridMismatch";
  }
  return "Unknown";
}

// All library failures are reported through this exception. what() is
// prefixed with the error name, e.g. "TooManyBands: ...".
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(ErrorName(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace msasb
