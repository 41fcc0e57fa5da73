#include "adelic/error.hpp"

namespace adelic {

std::string_view error_name(ErrorCode c) {
    switch (c) {
    case ErrorCode::OverflowBound: return "OverflowBound";
    case ErrorCode::InvalidGenerator: return "InvalidGenerator";
    case ErrorCode::SmallPrime: return "SmallPrime";
    case ErrorCode::NotEnumerated: return "NotEnumerated";
    case ErrorCode::MixedCharacteristic: return "MixedCharacteristic";
    case ErrorCode::NotCoprime: return "NotCoprime";
    case ErrorCode::RamifiedOrBadPoly: return "RamifiedOrBadPoly";
    case ErrorCode::DenominatorAtP: return "DenominatorAtP";
    case ErrorCode::NotAGroup: return "NotAGroup";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::NotPowerBasis: return "NotPowerBasis";
    case ErrorCode::FetchError: return "FetchError";
    case ErrorCode::OfflineMiss: return "OfflineMiss";
    case ErrorCode::BoundTooLarge: return "BoundTooLarge";
    case ErrorCode::ConductorViolation: return "ConductorViolation";
    case ErrorCode::NotClosed: return "NotClosed";
    case ErrorCode::BoundTooSmall: return "BoundTooSmall";
    case ErrorCode::IncompatibleFields: return "IncompatibleFields";
    case ErrorCode::BadPrime: return "BadPrime";
    case ErrorCode::NoSolution: return "NoSolution";
    case ErrorCode::NotSurjectiveOntoFactors: return "NotSurjectiveOntoFactors";
    case ErrorCode::NoEligibleEll: return "NoEligibleEll";
    case ErrorCode::IncompleteCover: return "IncompleteCover";
    case ErrorCode::NeedTwoPrimes: return "NeedTwoPrimes";
    case ErrorCode::RamifiedInK: return "RamifiedInK";
    case ErrorCode::NoSuitableU: return "NoSuitableU";
    case ErrorCode::LocalFieldTooBig: return "LocalFieldTooBig";
    case ErrorCode::LevelsNotCoprime: return "LevelsNotCoprime";
    case ErrorCode::Unsupported: return "Unsupported";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

int exit_code(ErrorCode c) {
    // 2 is left to the argument parser
    return 10 + static_cast<int>(c);
}

}  // namespace adelic
