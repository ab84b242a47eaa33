#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cellinf {

enum class ErrorCode {
    InvalidGraph,
    InvalidArgument,
    MissingEdge,
    RepeatedNode,
    TooShort,
    NotClosed,
    NotACycle,
    InvalidCell,
    NoPath,
    RankTooLarge,
    DegenerateInput,
    GraphIsForest,
    WalkFailed,
    GenerationFailed,
    DegenerateReference,
    ParseError,
    InvariantViolation,
    IoError,
    ConfigError,
};

inline std::string_view to_string(ErrorCode code)
{
    switch (code) {
    case ErrorCode::InvalidGraph: return "InvalidGraph";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::MissingEdge: return "MissingEdge";
    case ErrorCode::RepeatedNode: return "RepeatedNode";
    case ErrorCode::TooShort: return "TooShort";
    case ErrorCode::NotClosed: return "NotClosed";
    case ErrorCode::NotACycle: return "NotACycle";
    case ErrorCode::InvalidCell: return "InvalidCell";
    case ErrorCode::NoPath: return "NoPath";
    case ErrorCode::RankTooLarge: return "RankTooLarge";
    case ErrorCode::DegenerateInput: return "DegenerateInput";
    case ErrorCode::GraphIsForest: return "GraphIsForest";
    case ErrorCode::WalkFailed: return "WalkFailed";
    case ErrorCode::GenerationFailed: return "GenerationFailed";
    case ErrorCode::DegenerateReference: return "DegenerateReference";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::InvariantViolation: return "InvariantViolation";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::ConfigError: return "ConfigError";
    }
    return "Unknown";
}

/// Every failure raised by the library carries one of the codes above so
/// callers (and tests) can branch on the kind without parsing messages.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code)
    {
    }

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace cellinf
