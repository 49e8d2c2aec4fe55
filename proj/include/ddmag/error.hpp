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

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ddmag {

enum class ErrorCategory {
    kInvalidArgument,
    kInvalidTiming,
    kResourceLimit,
    kNoSignal,
    kFitFailure,
    kConfig,
    kIo,
};

/// Stable machine-readable name, used in CLI error output.
std::string_view category_name(ErrorCategory category);

class Error : public std::runtime_error {
   public:
    Error(ErrorCategory category, const std::string& message)
        : std::runtime_error(message), category_(category) {}

    ErrorCategory category() const { return category_; }

   private:
    ErrorCategory category_;
};

/// Thrown by the sinusoid fit; carries residual diagnostics for dumping.
class FitError : public Error {
   public:
    FitError(const std::string& message, double rms_residual, double amplitude, double period)
        : Error(ErrorCategory::kFitFailure, message),
          rms_residual_(rms_residual),
          amplitude_(amplitude),
          period_(period) {}

    double rms_residual() const { return rms_residual_; }
    double amplitude() const { return amplitude_; }
    double period() const { return period_; }

   private:
    double rms_residual_;
    double amplitude_;
    double period_;
};

[[noreturn]] inline void fail(ErrorCategory category, const std::string& message) {
    throw Error(category, message);
}

}  // namespace ddmag
