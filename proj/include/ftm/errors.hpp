#pragma once

#include <stdexcept>
#include <string>

namespace ftm {

enum class ErrorCode {
    InvalidArgument,
    InvalidOrdering,
    NoFrames,
    NoGroundTruth,
    NonPositiveDistance,
    ConstantFeature,
    TooFewSamples,
    EmptySource,
    DimensionMismatch,
    NotConverged,
    FactorizationFailed,
    DivergedLoss,
    EmptySearchSpace,
    InsufficientPointsInSegment,
    InsufficientData,
    EmptyInput,
    PeriodTooShort,
    UnsupportedVersion,
    ParseError,
    ValidationFailed,
    MissingRequiredColumn,
    UnitMismatch,
    IoFailure,
    UnsupportedVariant,
};

inline const char* error_code_name(ErrorCode c) {
    switch (c) {
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::InvalidOrdering: return "InvalidOrdering";
        case ErrorCode::NoFrames: return "NoFrames";
        case ErrorCode::NoGroundTruth: return "NoGroundTruth";
        case ErrorCode::NonPositiveDistance: return "NonPositiveDistance";
        case ErrorCode::ConstantFeature: return "ConstantFeature";
        case ErrorCode::TooFewSamples: return "TooFewSamples";
        case ErrorCode::EmptySource: return "EmptySource";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::NotConverged: return "NotConverged";
        case ErrorCode::FactorizationFailed: return "FactorizationFailed";
        case ErrorCode::DivergedLoss: return "DivergedLoss";
        case ErrorCode::EmptySearchSpace: return "EmptySearchSpace";
        case ErrorCode::InsufficientPointsInSegment: return "InsufficientPointsInSegment";
        case ErrorCode::InsufficientData: return "InsufficientData";
        case ErrorCode::EmptyInput: return "EmptyInput";
        case ErrorCode::PeriodTooShort: return "PeriodTooShort";
        case ErrorCode::UnsupportedVersion: return "UnsupportedVersion";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::ValidationFailed: return "ValidationFailed";
        case ErrorCode::MissingRequiredColumn: return "MissingRequiredColumn";
        case ErrorCode::UnitMismatch: return "UnitMismatch";
        case ErrorCode::IoFailure: return "IoFailure";
        case ErrorCode::UnsupportedVariant: return "UnsupportedVariant";
    }
    return "Unknown";
}

/// Exception carrying a machine-checkable code plus an optional index
/// (feature column, segment number, line number) in `detail`.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what, long detail = -1)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + what),
          code_(code),
          detail_(detail) {}

    ErrorCode code() const noexcept { return code_; }
    long detail() const noexcept { return detail_; }

private:
    ErrorCode code_;
    long detail_;
};

}  // namespace ftm
