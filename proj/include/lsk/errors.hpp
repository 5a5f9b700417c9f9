// Copyright 2026 The lsk Authors
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

#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace lsk {

/// Base class of every error raised by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input exists but does not match the expected syntax (JSON, RTTM, WAV).
class ParseError : public Error {
public:
    using Error::Error;
};

/// Input parsed but violates a domain invariant.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// File cannot be opened, read, or written.
class IoError : public Error {
public:
    using Error::Error;
};

/// Bad command-line usage or inconsistent option combination.
class UsageError : public Error {
public:
    using Error::Error;
};

/// A numerical routine failed (e.g. eigensolver did not converge).
class NumericError : public Error {
public:
    using Error::Error;
};

/// Receives non-fatal diagnostics. An empty sink means "print to stderr".
using WarningSink = std::function<void(std::string_view)>;

void emit_warning(const WarningSink& sink, std::string_view message);

} // namespace lsk
