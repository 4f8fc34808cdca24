#pragma once
#include <stdexcept>
#include <string>

namespace knotfield {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Input / construction errors.
struct UnknownCatalogEntry : Error { using Error::Error; };
struct NotCoprime : Error { using Error::Error; };
struct NonIntegerHarmonic : Error { using Error::Error; };
struct NonRationalScale : Error { using Error::Error; };
struct IrrationalCoefficient : Error { using Error::Error; };
struct ParseError : Error { using Error::Error; };

// Topology extraction errors.
struct DegenerateCrossing : Error { using Error::Error; };
struct AmbiguousCrossing : Error { using Error::Error; };

// Numerical failures.
struct NumericalError : Error { using Error::Error; };
struct SeedFailure : NumericalError { using NumericalError::NumericalError; };
struct ReconnectionSuspected : NumericalError { using NumericalError::NumericalError; };
struct BranchCollision : NumericalError { using NumericalError::NumericalError; };
struct NoConvergence : NumericalError { using NumericalError::NumericalError; };

}  // namespace knotfield
