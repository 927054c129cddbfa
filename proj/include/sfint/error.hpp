#ifndef SFINT_ERROR_HPP
#define SFINT_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace sfint {

enum class ErrorCode {
    ConstantRow,
    InvalidFactorCount,
    SpecConflict,
    CholeskyFailure,
    ShapeMismatch,
    InvalidFraction,
    AllRemoved,
    InsufficientDraws,
    FormatVersionMismatch,
    CorruptFile,
    ParseError,
    IoError,
    InvalidArgument,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries a stable code so that the CLI
/// can report it in machine-parsable form.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace sfint

#endif  // SFINT_ERROR_HPP
