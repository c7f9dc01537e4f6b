// Copyright 2026 The r2plan Authors.
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

#include <stdexcept>
#include <string>
#include <utility>

namespace r2plan {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Shapes disagree, probabilities are off the simplex, a parameter is out of range.
class InvalidInput : public Error {
public:
    using Error::Error;
};

/// A linear solve or an iterate produced something non-finite.
class NumericError : public Error {
public:
    using Error::Error;
};

/// A configuration the library deliberately does not handle.
class UnsupportedConfig : public Error {
public:
    using Error::Error;
};

/// Malformed MDP document. `where()` names the offending field or entry.
class ParseError : public Error {
public:
    ParseError(std::string where, const std::string& what)
        : Error(where + ": " + what), where_(std::move(where)) {}
    const std::string& where() const noexcept { return where_; }

private:
    std::string where_;
};

namespace detail {

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw InvalidInput(msg);
}

} // namespace detail
} // namespace r2plan
