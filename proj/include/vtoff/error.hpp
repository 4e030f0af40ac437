/*
 * Copyright 2026 The vtoff Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace vtoff {

enum class Errc {
  kUnsupportedFormat,
  kCorruptFile,
  kNotThreeChannel,
  kIo,
  kInvalidParams,
  kDimensionMismatch,
  kTooSmall,
  kNonPowerOfTwo,
  kBadHeader,
  kOffsetOverlap,
  kTruncatedPayload,
  kDtypeUnsupported,
  kMissingTensor,
  kShapeMismatch,
  kTooFewSamples,
  kEigFailure,
  kNonFinite,
  kMaskSizeMismatch,
  kEmptyDirectory,
  kUnpairedFiles,
  kMissingWeights,
  kExtractorMismatch,
  kInternal,
};

std::string_view errc_name(Errc code);

// Process exit code for a failure class: 2 input error, 3 missing assets,
// 4 internal numerical failure.
int exit_code_for(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

}  // namespace vtoff
