// Copyright 2026 The eswapsim Authors
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

#ifndef ESWAP_ERRORS_HPP
#define ESWAP_ERRORS_HPP

#include <functional>
#include <stdexcept>
#include <string>

namespace eswap {

struct SpaceMismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct CompileError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NonFinite : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct StepTooLarge : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CPViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UnderdeterminedGrid : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NonConvergence : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EncodingUnsupported : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct SeedRequired : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Non-fatal diagnostics (truncation guards and the like). The handler is a
// process-wide hook; tests install one to assert a warning fired.
namespace warnings {

enum class Kind { Truncation };

using Handler = std::function<void(Kind, const std::string&)>;

void set_handler(Handler h);   // empty handler restores the stderr default
void emit(Kind kind, const std::string& message);
long count(Kind kind);
void reset();

}  // namespace warnings

}  // namespace eswap

#endif  // ESWAP_ERRORS_HPP
