#include "sfint/error.hpp"

namespace sfint {

std::string_view to_string(ErrorCode code) noexcept
{
    switch (code) {
    case ErrorCode::ConstantRow: return "ConstantRow";
    case ErrorCode::InvalidFactorCount: return "InvalidFactorCount";
    case ErrorCode::SpecConflict: return "SpecConflict";
    case ErrorCode::CholeskyFailure: return "CholeskyFailure";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::InvalidFraction: return "InvalidFraction";
    case ErrorCode::AllRemoved: return "AllRemoved";
    case ErrorCode::InsufficientDraws: return "InsufficientDraws";
    case ErrorCode::FormatVersionMismatch: return "FormatVersionMismatch";
    case ErrorCode::CorruptFile: return "CorruptFile";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

}  // namespace sfint
