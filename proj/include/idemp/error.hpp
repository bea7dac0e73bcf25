/*
 * Copyright 2026 The idemp Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
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

namespace idemp {

enum class ErrorKind {
    invalid_argument,
    parse,
    metric_validation,
    normalization,
    space_mismatch,
    unknown_point,
    guard_exceeded,
    oracle_mismatch,
};

constexpr const char* to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::invalid_argument: return "invalid argument";
        case ErrorKind::parse: return "parse error";
        case ErrorKind::metric_validation: return "metric validation failure";
        case ErrorKind::normalization: return "normalization failure";
        case ErrorKind::space_mismatch: return "space mismatch";
        case ErrorKind::unknown_point: return "unknown point";
        case ErrorKind::guard_exceeded: return "size guard exceeded";
        case ErrorKind::oracle_mismatch: return "oracle mismatch";
    }
    return "error";
}

/// Single exception type for the library; `kind()` drives CLI exit codes.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

} // namespace idemp
