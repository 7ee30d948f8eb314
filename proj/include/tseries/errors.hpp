#pragma once

#include <stdexcept>
#include <string>

namespace tseries {

enum class ErrorKind {
    OrderUndecidable,
    SignUndecidable,
    UnboundParameter,
    DepthCapExceeded,
    NotPurelyLarge,
    ZeroSeries,
    NonInvertibleCoefficient,
    NonConstantLeadingCoefficient,
    NegativeBase,
    ConstantNotRepresentable,
    LogConstantNotDeclared,
    NonIntegrableAtCut,
    NotLargePositive,
    NoProgress,
    NotNearIdentity,
    IdentitySeries,
    TruncationTooCoarse,
    Unstabilized,
    WrongClass,
    DegenerateDenominator,
    DeepNoCommonSupport,
    NotPurelyDeepNormalForm,
    NoContraction,
    ReductionNotPurelyDeep,
    NotCommuting,
    VerificationFailed,
    BudgetExhausted,
    SyntaxError,
    SemanticError,
    Unsupported,
};

const char* kind_name(ErrorKind k);

class Error : public std::runtime_error {
public:
    Error(ErrorKind k, const std::string& msg)
        : std::runtime_error(std::string(kind_name(k)) + ": " + msg), kind_(k), detail_(msg) {}
    ErrorKind kind() const { return kind_; }
    const std::string& detail() const { return detail_; }

private:
    ErrorKind kind_;
    std::string detail_;
};

[[noreturn]] inline void fail(ErrorKind k, const std::string& msg) { throw Error(k, msg); }

}  // namespace tseries
