#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hiertext {

enum class ErrorKind {
    UnknownLabel,
    MalformedRow,
    DuplicateId,
    MissingColumn,
    InconsistentLabels,
    EmptyClass,
    EmptyDataset,
    TooFewExamples,
    InvalidK,
    InvalidArgument,
    EmptyCorpus,
    DimensionMismatch,
    CorruptModel,
    Misaligned,
    WeightLengthMismatch,
    InvalidStep,
    LengthMismatch,
    Io,
    Config,
};

inline std::string_view to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::UnknownLabel: return "UnknownLabel";
    case ErrorKind::MalformedRow: return "MalformedRow";
    case ErrorKind::DuplicateId: return "DuplicateId";
    case ErrorKind::MissingColumn: return "MissingColumn";
    case ErrorKind::InconsistentLabels: return "InconsistentLabels";
    case ErrorKind::EmptyClass: return "EmptyClass";
    case ErrorKind::EmptyDataset: return "EmptyDataset";
    case ErrorKind::TooFewExamples: return "TooFewExamples";
    case ErrorKind::InvalidK: return "InvalidK";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::EmptyCorpus: return "EmptyCorpus";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::CorruptModel: return "CorruptModel";
    case ErrorKind::Misaligned: return "Misaligned";
    case ErrorKind::WeightLengthMismatch: return "WeightLengthMismatch";
    case ErrorKind::InvalidStep: return "InvalidStep";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::Io: return "Io";
    case ErrorKind::Config: return "Config";
    }
    return "Unknown";
}

/// Every failure raised by the library carries a kind so callers (and the
/// CLI exit-code mapping) can branch without parsing messages.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& detail)
        : std::runtime_error(std::string(to_string(kind)) + ": " + detail), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

} // namespace hiertext
