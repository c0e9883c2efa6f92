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

#include "shadowmed/error.hpp"

namespace shadowmed {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::EmptyResult: return "EmptyResult";
    case ErrorCode::MissingCovariate: return "MissingCovariate";
    case ErrorCode::NonFiniteInput: return "NonFiniteInput";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::MissingTrueX: return "MissingTrueX";
    case ErrorCode::InsufficientCompleteCases: return "InsufficientCompleteCases";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::AllZeroWeights: return "AllZeroWeights";
    case ErrorCode::UnsolvableSystem: return "UnsolvableSystem";
    case ErrorCode::DegenerateTarget: return "DegenerateTarget";
    case ErrorCode::EmptyArm: return "EmptyArm";
    case ErrorCode::SingularProjection: return "SingularProjection";
  }
  return "UnknownError";
}

}  // namespace shadowmed
