#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace nhssh {

/// Failure modes surfaced by the library. Each maps onto one CLI exit class.
enum class ErrorKind {
    // configuration / input validation
    InvalidParams,
    ConfigMissingKey,
    ConfigBadValue,
    OutOfRange,
    // numerical
    ZeroFrequency,
    DegenerateEta,
    DegenerateLeadingCoefficient,
    RootResidualTooLarge,
    TrackingAmbiguous,
    ConvergenceFailure,
    OriginCrossing,
    ResidualTooLarge,
    SpectrumHit,
    GapUnknown,
    LosslessUnsupported,
    SingularKCL,
    StepRejected,
    EnergyIncrease,
    WindowOutOfRange,
    FitDiverged,
    InsufficientSignal,
    // filesystem
    Io,
};

enum class ErrorClass { Config, Numeric, Io };

[[nodiscard]] std::string_view to_string(ErrorKind kind) noexcept;
[[nodiscard]] ErrorClass classify(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message);

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }
    [[nodiscard]] ErrorClass error_class() const noexcept { return classify(kind_); }

private:
    ErrorKind kind_;
};

}  // namespace nhssh
