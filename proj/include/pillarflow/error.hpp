/* Copyright 2026 The Pillarflow Authors. All Rights Reserved.

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

#ifndef PILLARFLOW_ERROR_HPP_
#define PILLARFLOW_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace pillarflow {

// Numeric values are part of the C ABI (see pillarflow.h); append only.
enum class ErrorCode : int {
  kOk = 0,
  kDuplicateCoordinate = 1,
  kCoordinateOutOfBounds = 2,
  kShapeMismatch = 3,
  kCapacityTooSmall = 4,
  kInvalidTileConfig = 5,
  kInvalidDensity = 6,
  kConfigParseError = 7,
  kInvalidArgument = 8,
  kIoError = 9,
  kInvariantViolation = 10,
};

const char* ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

#define PF_CHECK(cond, code, msg)                        \
  do {                                                   \
    if (!(cond)) throw ::pillarflow::Error((code), (msg)); \
  } while (0)

}  // namespace pillarflow

#endif  // PILLARFLOW_ERROR_HPP_
