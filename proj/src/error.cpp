// Copyright 2026 The CityPulse Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "citypulse/error.hpp"

namespace citypulse {

std::string_view error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kMalformedJson: return "MalformedJson";
    case ErrorKind::kMissingField: return "MissingField";
    case ErrorKind::kBadGeometry: return "BadGeometry";
    case ErrorKind::kIoError: return "IoError";
    case ErrorKind::kInvalidArgument: return "InvalidArgument";
    case ErrorKind::kUnknownStep: return "UnknownStep";
    case ErrorKind::kEmptyCorpus: return "EmptyCorpus";
    case ErrorKind::kDegenerateVocabulary: return "DegenerateVocabulary";
    case ErrorKind::kRowMismatch: return "RowMismatch";
    case ErrorKind::kSingleClassTraining: return "SingleClassTraining";
    case ErrorKind::kTooFewExamples: return "TooFewExamples";
    case ErrorKind::kUnknownMode: return "UnknownMode";
    case ErrorKind::kEmptyGroup: return "EmptyGroup";
    case ErrorKind::kConfigError: return "ConfigError";
    case ErrorKind::kFormatError: return "FormatError";
    case ErrorKind::kLocked: return "Locked";
  }
  return "Unknown";
}

}  // namespace citypulse
