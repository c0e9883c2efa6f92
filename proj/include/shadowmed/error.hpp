/*
  Copyright 2026 The shadowmed Authors

  Licensed under the Apache License, Version 2.0 (the "License");
  you may not use this file except in compliance with the License.
  You may obtain a copy of the License at

  http://www.apache.org/licenses/LICENSE-2.0

  Unless required by applicable law or agreed to in writing, software
  distributed under the License is distributed on an "AS IS" BASIS,
  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
  See the License for the specific language governing permissions and
  limitations under the License.
*/

#pragma once

#include <stdexcept>
#include <string>

namespace shadowmed {

enum class ErrorCode {
  // configuration
  ConfigError,
  // data
  DimensionMismatch,
  EmptyDataset,
  EmptyResult,
  MissingCovariate,
  NonFiniteInput,
  LengthMismatch,
  MissingTrueX,
  InsufficientCompleteCases,
  IoError,
  // solver
  AllZeroWeights,
  UnsolvableSystem,
  DegenerateTarget,
  EmptyArm,
  SingularProjection,
};

enum class ErrorCategory { Config, Data, Solver };

inline ErrorCategory category_of(ErrorCode code) {
  switch (code) {
    case ErrorCode::ConfigError:
      return ErrorCategory::Config;
    case ErrorCode::AllZeroWeights:
    case ErrorCode::UnsolvableSystem:
    case ErrorCode::DegenerateTarget:
    case ErrorCode::EmptyArm:
    case ErrorCode::SingularProjection:
      return ErrorCategory::Solver;
    default:
      return ErrorCategory::Data;
  }
}

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  ErrorCategory category() const noexcept { return category_of(code_); }

 private:
  ErrorCode code_;
};

}  // namespace shadowmed
