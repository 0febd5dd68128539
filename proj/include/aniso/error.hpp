#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace aniso {

enum class ErrorCode {
    InvalidArgument,
    NotExpansive,
    BadMargins,
    RangeExceeded,
    BadShapeParameter,
    BadP,
    EmptyRange,
    TagMismatch,
    ScaleOutOfRange,
    OutsideShell,
    DerivativeOrderExceeded,
    NonFinite,
    ShellUnresolved,
    ShellOutsideBox,
    IllConditioned,
    AtomValidationFailed,
    NormalizationDegenerate,
    Unsupported,
    IoError,
};

constexpr std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NotExpansive: return "NotExpansive";
    case ErrorCode::BadMargins: return "BadMargins";
    case ErrorCode::RangeExceeded: return "RangeExceeded";
    case ErrorCode::BadShapeParameter: return "BadShapeParameter";
    case ErrorCode::BadP: return "BadP";
    case ErrorCode::EmptyRange: return "EmptyRange";
    case ErrorCode::TagMismatch: return "TagMismatch";
    case ErrorCode::ScaleOutOfRange: return "ScaleOutOfRange";
    case ErrorCode::OutsideShell: return "OutsideShell";
    case ErrorCode::DerivativeOrderExceeded: return "DerivativeOrderExceeded";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::ShellUnresolved: return "ShellUnresolved";
    case ErrorCode::ShellOutsideBox: return "ShellOutsideBox";
    case ErrorCode::IllConditioned: return "IllConditioned";
    case ErrorCode::AtomValidationFailed: return "AtomValidationFailed";
    case ErrorCode::NormalizationDegenerate: return "NormalizationDegenerate";
    case ErrorCode::Unsupported: return "Unsupported";
    case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

/// Every library failure carries a machine-readable code; the CLI maps it to
/// its error JSON.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace aniso
