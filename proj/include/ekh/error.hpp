#pragma once

#include <stdexcept>
#include <string>

namespace ekh {

enum class ErrorCode {
    ValenceOrder,
    NonNeutral,
    NonPositive,
    InfeasibleConstraints,
    DisconnectedFluid,
    ResolutionTooCoarse,
    GridMismatch,
    NoConvergence,
    InconsistentRhs,
    CutoffActive,
    MissingCellSolution,
    ConfigMismatch,
    NonSpdTensor,
    UnknownKey,
    TypeError,
    MissingRequired,
    StageFailure,
    Io,
};

const char* error_code_name(ErrorCode c);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code) {}
    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

} // namespace ekh
