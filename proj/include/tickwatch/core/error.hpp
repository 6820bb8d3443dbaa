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

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tickwatch {

enum class ErrorCode {
  kInvalidInput,
  kInsufficientData,
  kFitFailure,
  kModelUnavailable,
  kDegenerateDistribution,
  kInvalidState,
  kInvalidQuery,
  kConflict,
  kNotFound,
  kSourceUnavailable,
  kDeliveryFailed,
  kInternal,
};

std::string_view ErrorCodeName(ErrorCode code);
// Inverse of ErrorCodeName; unknown names map to kInternal.
ErrorCode ErrorCodeFromName(std::string_view name);

// Every recoverable failure in the library is reported as an Error carrying
// one of the codes above. The HTTP layer maps codes onto status classes.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void Fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace tickwatch
