#pragma once

#include <stdexcept>
#include <string>

namespace kspp {

/// Base class for all kspp errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

#define KSPP_DEFINE_ERROR(Name)                    \
    struct Name : Error {                          \
        using Error::Error;                        \
    }

// domain / fields
KSPP_DEFINE_ERROR(NonPositiveLength);
KSPP_DEFINE_ERROR(ResolutionTooSmall);
KSPP_DEFINE_ERROR(ShapeMismatch);
KSPP_DEFINE_ERROR(DomainMismatch);
KSPP_DEFINE_ERROR(InvalidExponent);
KSPP_DEFINE_ERROR(ParityMismatch);

// semigroup
KSPP_DEFINE_ERROR(NegativeTime);
KSPP_DEFINE_ERROR(ExponentOrderViolation);
KSPP_DEFINE_ERROR(MeanNotZero);

// forcing
KSPP_DEFINE_ERROR(WindowTooShort);

// mild solver
KSPP_DEFINE_ERROR(OutOfRange);
KSPP_DEFINE_ERROR(MissingReport);
KSPP_DEFINE_ERROR(ExponentRegimeViolation);
KSPP_DEFINE_ERROR(GridMismatch);
KSPP_DEFINE_ERROR(EmptyTrajectory);
KSPP_DEFINE_ERROR(SmallnessViolated);
KSPP_DEFINE_ERROR(NoConvergence);
KSPP_DEFINE_ERROR(BoundViolated);

// stability
KSPP_DEFINE_ERROR(RateOrderViolation);

// cli
KSPP_DEFINE_ERROR(ConfigParseError);

#undef KSPP_DEFINE_ERROR

}  // namespace kspp
