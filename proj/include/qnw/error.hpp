// Copyright 2026 The qnw Authors
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

namespace qnw {

enum class ErrorKind {
    NonHermitianTerm,
    NormDriftExceeded,
    DimensionMismatch,
    ZeroGap,
    FitFailed,
    IoError,
    SingularNormalMatrix,
    DegenerateVariance,
    ShapeMismatch,
    DesignFailed,
    ThetaOutOfRange,
    RegisterTooLarge,
    Diverged,
    UnknownCommand,
    BadConfig,
    MissingRun,
    InvalidArgument,
};

constexpr std::string_view error_kind_name(ErrorKind k) {
    switch (k) {
        case ErrorKind::NonHermitianTerm: return "NonHermitianTerm";
        case ErrorKind::NormDriftExceeded: return "NormDriftExceeded";
        case ErrorKind::DimensionMismatch: return "DimensionMismatch";
        case ErrorKind::ZeroGap: return "ZeroGap";
        case ErrorKind::FitFailed: return "FitFailed";
        case ErrorKind::IoError: return "IoError";
        case ErrorKind::SingularNormalMatrix: return "SingularNormalMatrix";
        case ErrorKind::DegenerateVariance: return "DegenerateVariance";
        case ErrorKind::ShapeMismatch: return "ShapeMismatch";
        case ErrorKind::DesignFailed: return "DesignFailed";
        case ErrorKind::ThetaOutOfRange: return "ThetaOutOfRange";
        case ErrorKind::RegisterTooLarge: return "RegisterTooLarge";
        case ErrorKind::Diverged: return "Diverged";
        case ErrorKind::UnknownCommand: return "UnknownCommand";
        case ErrorKind::BadConfig: return "BadConfig";
        case ErrorKind::MissingRun: return "MissingRun";
        case ErrorKind::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

/// Every failure raised by the library carries one of the kinds above.
class Error : public std::runtime_error {
   public:
    Error(ErrorKind kind, const std::string &what)
        : std::runtime_error(std::string(error_kind_name(kind)) + ": " + what), kind_(kind) {
    }
    ErrorKind kind() const noexcept {
        return kind_;
    }

   private:
    ErrorKind kind_;
};

/// Validation failures map to CLI exit code 1, everything else to 2.
constexpr bool is_validation_error(ErrorKind k) {
    return k == ErrorKind::UnknownCommand || k == ErrorKind::BadConfig || k == ErrorKind::MissingRun ||
           k == ErrorKind::InvalidArgument || k == ErrorKind::ShapeMismatch;
}

}  // namespace qnw
