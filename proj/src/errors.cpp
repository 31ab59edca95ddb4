#include "torsionlab/errors.hpp"

namespace tl {

const char* code_name(ErrorCode c) {
    switch (c) {
        case ErrorCode::InvalidGluing: return "InvalidGluing";
        case ErrorCode::UnsupportedAngle: return "UnsupportedAngle";
        case ErrorCode::UnknownPoint: return "UnknownPoint";
        case ErrorCode::BadCuts: return "BadCuts";
        case ErrorCode::NonUnitaryGauge: return "NonUnitaryGauge";
        case ErrorCode::NotAClosedWalk: return "NotAClosedWalk";
        case ErrorCode::KernelMismatch: return "KernelMismatch";
        case ErrorCode::EmptySpectrum: return "EmptySpectrum";
        case ErrorCode::TooLarge: return "TooLarge";
        case ErrorCode::RankUnsupported: return "RankUnsupported";
        case ErrorCode::NegativeUnderSqrt: return "NegativeUnderSqrt";
        case ErrorCode::NotClassifiable: return "NotClassifiable";
        case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
        case ErrorCode::SupportTooWide: return "SupportTooWide";
        case ErrorCode::DomainError: return "DomainError";
        case ErrorCode::BudgetExceeded: return "BudgetExceeded";
        case ErrorCode::HypothesisViolation: return "HypothesisViolation";
        case ErrorCode::BisectionFailure: return "BisectionFailure";
        case ErrorCode::SupportViolation: return "SupportViolation";
        case ErrorCode::ConfigError: return "ConfigError";
    }
    return "Unknown";
}

}  // namespace tl
