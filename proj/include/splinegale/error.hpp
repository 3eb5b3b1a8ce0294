#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace splinegale {

enum class ErrorCode {
    AtomTooSmall,
    IndexOutOfRange,
    InvalidPartition,
    NotARefinement,
    DegreeOverflow,
    QuadratureNonConvergence,
    EmptySet,
    SingularGram,
    BoundViolation,
    ZeroFunction,
    ParameterError,
    NotAdapted,
    DivisionByZero,
    PropertyViolation,
    InstanceInvalid,
    InternalExhaustion,
    GenerationExhausted,
    InvalidConfig,
    SamplingDisagreement,
};

constexpr std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::AtomTooSmall: return "AtomTooSmall";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::InvalidPartition: return "InvalidPartition";
    case ErrorCode::NotARefinement: return "NotARefinement";
    case ErrorCode::DegreeOverflow: return "DegreeOverflow";
    case ErrorCode::QuadratureNonConvergence: return "QuadratureNonConvergence";
    case ErrorCode::EmptySet: return "EmptySet";
    case ErrorCode::SingularGram: return "SingularGram";
    case ErrorCode::BoundViolation: return "BoundViolation";
    case ErrorCode::ZeroFunction: return "ZeroFunction";
    case ErrorCode::ParameterError: return "ParameterError";
    case ErrorCode::NotAdapted: return "NotAdapted";
    case ErrorCode::DivisionByZero: return "DivisionByZero";
    case ErrorCode::PropertyViolation: return "PropertyViolation";
    case ErrorCode::InstanceInvalid: return "InstanceInvalid";
    case ErrorCode::InternalExhaustion: return "InternalExhaustion";
    case ErrorCode::GenerationExhausted: return "GenerationExhausted";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::SamplingDisagreement: return "SamplingDisagreement";
    }
    return "Unknown";
}

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace splinegale
