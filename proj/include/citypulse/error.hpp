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

#ifndef CITYPULSE_ERROR_HPP_
#define CITYPULSE_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace citypulse {

// Every failure surfaced by the library carries one of these classes. The CLI
// prints the class name as the first token of its error line.
enum class ErrorKind {
  kMalformedJson,
  kMissingField,
  kBadGeometry,
  kIoError,
  kInvalidArgument,
  kUnknownStep,
  kEmptyCorpus,
  kDegenerateVocabulary,
  kRowMismatch,
  kSingleClassTraining,
  kTooFewExamples,
  kUnknownMode,
  kEmptyGroup,
  kConfigError,
  kFormatError,
  kLocked,
};

std::string_view error_kind_name(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }
  std::string_view kind_name() const { return error_kind_name(kind_); }

 private:
  ErrorKind kind_;
};

}  // namespace citypulse

#endif  // CITYPULSE_ERROR_HPP_
