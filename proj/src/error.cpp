/*
 * Copyright (C) 2026 The Lumenpoint Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "lumenpoint/error.hpp"

namespace lumenpoint {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::AllDepthMissing: return "AllDepthMissing";
        case ErrorCode::ZeroDepthTarget: return "ZeroDepthTarget";
        case ErrorCode::NotARotation: return "NotARotation";
        case ErrorCode::EmptyCloud: return "EmptyCloud";
        case ErrorCode::NotUnit: return "NotUnit";
        case ErrorCode::MissingPixels: return "MissingPixels";
        case ErrorCode::EmptySamples: return "EmptySamples";
        case ErrorCode::DegenerateScene: return "DegenerateScene";
        case ErrorCode::TooFewScenes: return "TooFewScenes";
        case ErrorCode::FormatVersionMismatch: return "FormatVersionMismatch";
        case ErrorCode::ChecksumMismatch: return "ChecksumMismatch";
        case ErrorCode::TooFewPoints: return "TooFewPoints";
        case ErrorCode::GraphConsumed: return "GraphConsumed";
        case ErrorCode::DivergedLoss: return "DivergedLoss";
        case ErrorCode::IoError: return "IoError";
        case ErrorCode::FormatError: return "FormatError";
    }
    return "Unknown";
}

}  // namespace lumenpoint
