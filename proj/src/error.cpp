// Copyright 2026 The ddmag Authors
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

#include "ddmag/error.hpp"

namespace ddmag {

std::string_view category_name(ErrorCategory category) {
    switch (category) {
        case ErrorCategory::kInvalidArgument:
            return "invalid-argument";
        case ErrorCategory::kInvalidTiming:
            return "invalid-timing";
        case ErrorCategory::kResourceLimit:
            return "resource-limit";
        case ErrorCategory::kNoSignal:
            return "no-signal";
        case ErrorCategory::kFitFailure:
            return "fit-failure";
        case ErrorCategory::kConfig:
            return "config";
        case ErrorCategory::kIo:
            return "io";
    }
    return "unknown";
}

}  // namespace ddmag
