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
#include "vtoff/error.hpp"

namespace vtoff {

std::string_view errc_name(Errc code) {
  switch (code) {
    case Errc::kUnsupportedFormat: return "UnsupportedFormat";
    case Errc::kCorruptFile: return "CorruptFile";
    case Errc::kNotThreeChannel: return "NotThreeChannel";
    case Errc::kIo: return "Io";
    case Errc::kInvalidParams: return "InvalidParams";
    case Errc::kDimensionMismatch: return "DimensionMismatch";
    case Errc::kTooSmall: return "TooSmall";
    case Errc::kNonPowerOfTwo: return "NonPowerOfTwo";
    case Errc::kBadHeader: return "BadHeader";
    case Errc::kOffsetOverlap: return "OffsetOverlap";
    case Errc::kTruncatedPayload: return "TruncatedPayload";
    case Errc::kDtypeUnsupported: return "DtypeUnsupported";
    case Errc::kMissingTensor: return "MissingTensor";
    case Errc::kShapeMismatch: return "ShapeMismatch";
    case Errc::kTooFewSamples: return "TooFewSamples";
    case Errc::kEigFailure: return "EigFailure";
    case Errc::kNonFinite: return "NonFinite";
    case Errc::kMaskSizeMismatch: return "MaskSizeMismatch";
    case Errc::kEmptyDirectory: return "EmptyDirectory";
    case Errc::kUnpairedFiles: return "UnpairedFiles";
    case Errc::kMissingWeights: return "MissingWeights";
    case Errc::kExtractorMismatch: return "ExtractorMismatch";
    case Errc::kInternal: return "Internal";
  }
  return "Unknown";
}

int exit_code_for(Errc code) {
  switch (code) {
    case Errc::kMissingWeights:
    case Errc::kMissingTensor:
      return 3;
    case Errc::kEigFailure:
    case Errc::kInternal:
      return 4;
    default:
      return 2;
  }
}

}  // namespace vtoff
