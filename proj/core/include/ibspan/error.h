// Copyright 2026 The ibspan Authors.
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

#ifndef IBSPAN_ERROR_H_
#define IBSPAN_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace ibspan {

enum class ErrorCode {
  kMalformedLine,
  kInvalidTag,
  kInvalidTransition,
  kSpanOutOfRange,
  kDuplicateSpan,
  kDimMismatch,
  kShapeMismatch,
  kNonScalarLoss,
  kBadShape,
  kEmptySupport,
  kDivergedLoss,
  kMisalignedCorpora,
  kDigestMismatch,
  kConfigError,
  kIoError,
};

std::string_view ErrorCodeName(ErrorCode code);

// All library failures surface as this exception; code() identifies the
// failure class so callers (and the CLI's exit-code mapping) can branch.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace ibspan

#endif  // IBSPAN_ERROR_H_
