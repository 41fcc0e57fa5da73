#pragma once
#include <stdexcept>
#include <string>
#include <string_view>

namespace adelic {

enum class ErrorCode {
    OverflowBound,
    InvalidGenerator,
    SmallPrime,
    NotEnumerated,
    MixedCharacteristic,
    NotCoprime,
    RamifiedOrBadPoly,
    DenominatorAtP,
    NotAGroup,
    SchemaError,
    NotPowerBasis,
    FetchError,
    OfflineMiss,
    BoundTooLarge,
    ConductorViolation,
    NotClosed,
    BoundTooSmall,
    IncompatibleFields,
    BadPrime,
    NoSolution,
    NotSurjectiveOntoFactors,
    NoEligibleEll,
    IncompleteCover,
    NeedTwoPrimes,
    RamifiedInK,
    NoSuitableU,
    LocalFieldTooBig,
    LevelsNotCoprime,
    Unsupported,
    InvalidArgument,
};

std::string_view error_name(ErrorCode c);

// process exit status used by the command line tool; stable per code
int exit_code(ErrorCode c);

class Error : public std::runtime_error {
public:
    Error(ErrorCode c, const std::string& what)
        : std::runtime_error(std::string(error_name(c)) + ": " + what), code_(c) {}
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace adelic
