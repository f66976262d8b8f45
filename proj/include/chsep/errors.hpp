#pragma once

#include <stdexcept>
#include <string>

namespace chsep {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
struct DomainError : Error {
    using Error::Error;
};

/// Reaction data incompatible with the admissibility conditions.
struct CompatibilityError : Error {
    using Error::Error;
};

/// Two fields on different grids were combined.
struct GridMismatch : Error {
    using Error::Error;
};

/// Operation requires a zero-mean field.
struct MeanNotZero : Error {
    using Error::Error;
};

/// Kernel width below the resolvable scale of the grid.
struct ResolutionError : Error {
    using Error::Error;
};

/// Constant search exhausted its lattice without certifying the grid.
struct SearchFailed : Error {
    using Error::Error;
};

/// Nonlinear solve failed to reach tolerance within the iteration cap.
struct NewtonDiverged : Error {
    using Error::Error;
};

/// Phase field left the physical interval (-1,1).
struct BoundsBreached : Error {
    using Error::Error;
};

/// Kernel coercivity condition violated.
struct CoercivityViolated : Error {
    using Error::Error;
};

/// Nutrient left [0,1] beyond the allowed slack.
struct NutrientBoundsBreached : Error {
    using Error::Error;
};

/// Rate fit impossible (zero distance between runs).
struct FitDegenerate : Error {
    using Error::Error;
};

/// Unrecognized preset name.
struct UnknownPreset : Error {
    using Error::Error;
};

/// Malformed configuration text.
struct ConfigError : Error {
    using Error::Error;
};

} // namespace chsep
