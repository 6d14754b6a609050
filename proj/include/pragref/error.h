// Copyright 2026 The Pragref Authors
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

#ifndef PRAGREF_ERROR_H_
#define PRAGREF_ERROR_H_

#include <stdexcept>
#include <string>

namespace pragref {

// Every error class carries the process exit code the CLI reports for it.
enum class ErrorCode : int {
  kUsage = 2,
  kParse = 3,
  kMissingField = 4,
  kPerceptibility = 5,
  kSamplingBudget = 6,
  kIndexOutOfRange = 7,
  kNonFiniteGradient = 8,
  kEmptyUtterance = 9,
  kVacuousUtterance = 10,
  kMissingCheckpoint = 11,
  kCheckpointFormat = 12,
  kIo = 13,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }
  int exit_code() const { return static_cast<int>(code_); }

 private:
  ErrorCode code_;
};

class ParseError : public Error {
 public:
  ParseError(int line, const std::string& what)
      : Error(ErrorCode::kParse,
              "line " + std::to_string(line) + ": " + what),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

#define PRAGREF_DEFINE_ERROR(Name, Code)                              \
  class Name : public Error {                                         \
   public:                                                            \
    explicit Name(const std::string& what) : Error(Code, what) {}     \
  }

PRAGREF_DEFINE_ERROR(UsageError, ErrorCode::kUsage);
PRAGREF_DEFINE_ERROR(MissingField, ErrorCode::kMissingField);
PRAGREF_DEFINE_ERROR(PerceptibilityViolation, ErrorCode::kPerceptibility);
PRAGREF_DEFINE_ERROR(SamplingBudgetExceeded, ErrorCode::kSamplingBudget);
PRAGREF_DEFINE_ERROR(IndexOutOfRange, ErrorCode::kIndexOutOfRange);
PRAGREF_DEFINE_ERROR(NonFiniteGradient, ErrorCode::kNonFiniteGradient);
PRAGREF_DEFINE_ERROR(EmptyUtterance, ErrorCode::kEmptyUtterance);
PRAGREF_DEFINE_ERROR(VacuousUtterance, ErrorCode::kVacuousUtterance);
PRAGREF_DEFINE_ERROR(MissingCheckpoint, ErrorCode::kMissingCheckpoint);
PRAGREF_DEFINE_ERROR(CheckpointFormatError, ErrorCode::kCheckpointFormat);
PRAGREF_DEFINE_ERROR(IoError, ErrorCode::kIo);

#undef PRAGREF_DEFINE_ERROR

}  // namespace pragref

#endif  // PRAGREF_ERROR_H_
