#pragma once

#include <stdexcept>
#include <string>

namespace drfuse {

enum class ErrorKind {
    MissingFile,
    IoError,
    DecodeError,
    UnsupportedBitDepth,
    DimMismatch,
    NonSquareRotation,
    DuplicateRotation,
    MissingPrediction,
    LengthMismatch,
    WrongArity,
    IdMismatch,
    DuplicateId,
    EmptyMatrix,
    InconsistentConditionVector,
    DuplicateOutputId,
    ParseError,
    InvalidConfig,
    InvalidArgument,
};

inline const char* to_string(ErrorKind kind) noexcept {
    switch (kind) {
    case ErrorKind::MissingFile: return "MissingFile";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::DecodeError: return "DecodeError";
    case ErrorKind::UnsupportedBitDepth: return "UnsupportedBitDepth";
    case ErrorKind::DimMismatch: return "DimMismatch";
    case ErrorKind::NonSquareRotation: return "NonSquareRotation";
    case ErrorKind::DuplicateRotation: return "DuplicateRotation";
    case ErrorKind::MissingPrediction: return "MissingPrediction";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::WrongArity: return "WrongArity";
    case ErrorKind::IdMismatch: return "IdMismatch";
    case ErrorKind::DuplicateId: return "DuplicateId";
    case ErrorKind::EmptyMatrix: return "EmptyMatrix";
    case ErrorKind::InconsistentConditionVector: return "InconsistentConditionVector";
    case ErrorKind::DuplicateOutputId: return "DuplicateOutputId";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    }
    return "UnknownError";
}

/// Single exception type for the whole library; `kind()` identifies the
/// failure class so callers can map it onto exit codes or recovery paths.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void raise(ErrorKind kind, const std::string& message) {
    throw Error(kind, message);
}

} // namespace drfuse
