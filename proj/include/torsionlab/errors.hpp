#pragma once

#include <stdexcept>
#include <string>

namespace tl {

enum class ErrorCode {
    InvalidGluing,
    UnsupportedAngle,
    UnknownPoint,
    BadCuts,
    NonUnitaryGauge,
    NotAClosedWalk,
    KernelMismatch,
    EmptySpectrum,
    TooLarge,
    RankUnsupported,
    NegativeUnderSqrt,
    NotClassifiable,
    IndexOutOfRange,
    SupportTooWide,
    DomainError,
    BudgetExceeded,
    HypothesisViolation,
    BisectionFailure,
    SupportViolation,
    ConfigError,
};

const char* code_name(ErrorCode c);

class Error : public std::runtime_error {
public:
    Error(ErrorCode c, const std::string& what)
        : std::runtime_error(std::string(code_name(c)) + ": " + what), code_(c) {}
    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

}  // namespace tl
