#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace finitopo {

enum class ErrorCode {
    OutOfChart,
    RankDeficient,
    NotUnit,
    StepTooLarge,
    LeftChart,
    Unreachable,
    ShootUnsupported,
    EmptyTail,
    NotMinimal,
    TooShort,
    NotApplicable,
    NoIntersection,
    AllTangential,
    CriticalPoint,
    PsiFloor,
    UnknownSurface,
    BadParams,
    ParseError,
    ValidationError,
    IoError,
};

std::string_view to_string(ErrorCode code);

/// Error carrying a machine-readable code; every failure in the toolkit is
/// reported through this type.
class GeometryError : public std::runtime_error {
public:
    GeometryError(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace finitopo
