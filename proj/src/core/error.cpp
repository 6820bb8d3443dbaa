// Copyright 2026 The Tickwatch Authors.
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

#include "tickwatch/core/error.hpp"

namespace tickwatch {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidInput: return "InvalidInput";
    case ErrorCode::kInsufficientData: return "InsufficientData";
    case ErrorCode::kFitFailure: return "FitFailure";
    case ErrorCode::kModelUnavailable: return "ModelUnavailable";
    case ErrorCode::kDegenerateDistribution: return "DegenerateDistribution";
    case ErrorCode::kInvalidState: return "InvalidState";
    case ErrorCode::kInvalidQuery: return "InvalidQuery";
    case ErrorCode::kConflict: return "Conflict";
    case ErrorCode::kNotFound: return "NotFound";
    case ErrorCode::kSourceUnavailable: return "SourceUnavailable";
    case ErrorCode::kDeliveryFailed: return "DeliveryFailed";
    case ErrorCode::kInternal: return "Internal";
  }
  return "Unknown";
}

ErrorCode ErrorCodeFromName(std::string_view name) {
  for (int c = 0; c <= static_cast<int>(ErrorCode::kInternal); ++c) {
    if (ErrorCodeName(static_cast<ErrorCode>(c)) == name) return static_cast<ErrorCode>(c);
  }
  return ErrorCode::kInternal;
}

}  // namespace tickwatch
