#include "nhssh/errors.hpp"

namespace nhssh {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::InvalidParams: return "InvalidParams";
        case ErrorKind::ConfigMissingKey: return "ConfigMissingKey";
        case ErrorKind::ConfigBadValue: return "ConfigBadValue";
        case ErrorKind::OutOfRange: return "OutOfRange";
        case ErrorKind::ZeroFrequency: return "ZeroFrequency";
        case ErrorKind::DegenerateEta: return "DegenerateEta";
        case ErrorKind::DegenerateLeadingCoefficient: return "DegenerateLeadingCoefficient";
        case ErrorKind::RootResidualTooLarge: return "RootResidualTooLarge";
        case ErrorKind::TrackingAmbiguous: return "TrackingAmbiguous";
        case ErrorKind::ConvergenceFailure: return "ConvergenceFailure";
        case ErrorKind::OriginCrossing: return "OriginCrossing";
        case ErrorKind::ResidualTooLarge: return "ResidualTooLarge";
        case ErrorKind::SpectrumHit: return "SpectrumHit";
        case ErrorKind::GapUnknown: return "GapUnknown";
        case ErrorKind::LosslessUnsupported: return "LosslessUnsupported";
        case ErrorKind::SingularKCL: return "SingularKCL";
        case ErrorKind::StepRejected: return "StepRejected";
        case ErrorKind::EnergyIncrease: return "EnergyIncrease";
        case ErrorKind::WindowOutOfRange: return "WindowOutOfRange";
        case ErrorKind::FitDiverged: return "FitDiverged";
        case ErrorKind::InsufficientSignal: return "InsufficientSignal";
        case ErrorKind::Io: return "Io";
    }
    return "Unknown";
}

ErrorClass classify(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::InvalidParams:
        case ErrorKind::ConfigMissingKey:
        case ErrorKind::ConfigBadValue:
        case ErrorKind::OutOfRange:
            return ErrorClass::Config;
        case ErrorKind::Io:
            return ErrorClass::Io;
        default:
            return ErrorClass::Numeric;
    }
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

}  // namespace nhssh
