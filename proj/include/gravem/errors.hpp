// Error taxonomy shared by all gravem modules.
#pragma once

#include <stdexcept>
#include <string>

namespace gravem {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// geometry / charts
struct OutsideChartDomain : Error { using Error::Error; };
struct NumericalDerivativeFailure : Error { using Error::Error; };
struct NonPositiveWavelength : Error { using Error::Error; };

// plane-wave algebra
struct ZeroMomentum : Error { using Error::Error; };
struct InvalidHelicity : Error { using Error::Error; };
struct NotHelicityEigenstate : Error { using Error::Error; };
struct KappaOutOfRange : Error { using Error::Error; };
struct InvalidGravHelicity : Error { using Error::Error; };
struct DegenerateInput : Error { using Error::Error; };
struct NonUnitAxis : Error { using Error::Error; };

// geodesics and transport
struct StepSizeUnderflow : Error { using Error::Error; };
struct NonNullInitialMomentum : Error { using Error::Error; };
struct NonNullMomentum : Error { using Error::Error; };
struct EmptyPath : Error { using Error::Error; };
struct NonSymmetricInput : Error { using Error::Error; };
struct NonTransverseInput : Error { using Error::Error; };
struct GridMismatch : Error { using Error::Error; };

// emulation pipeline
struct NonPositiveScale : Error { using Error::Error; };
struct ErgoregionOrHorizon : Error { using Error::Error; };
struct NonPositiveParameter : Error { using Error::Error; };

// scenario configs
struct SyntaxError : Error { using Error::Error; };
struct UnknownKey : Error { using Error::Error; };
struct ConstraintViolation : Error { using Error::Error; };

}  // namespace gravem
