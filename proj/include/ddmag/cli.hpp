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

#include <iosfwd>

#include "ddmag/error.hpp"

namespace ddmag {

/// Process exit status for an error category: 2 for bad input, 3 when the
/// data carry no usable signal, 4 for filesystem problems.
int exit_code(ErrorCategory category);

/// Entry point behind the `ddmag` executable. Never throws; errors are
/// reported on `err` as `error[<category>]: <message>`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ddmag
