#pragma once

#include <stdexcept>
#include <string>

namespace aniso {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

#define ANISO_DEFINE_ERROR(Name)                  \
    struct Name : Error {                         \
        using Error::Error;                       \
    }

ANISO_DEFINE_ERROR(NonUnitInput);
ANISO_DEFINE_ERROR(PositivityViolation);
ANISO_DEFINE_ERROR(DerivativeFailure);
ANISO_DEFINE_ERROR(ZeroVector);
ANISO_DEFINE_ERROR(MaximizerNotConverged);
ANISO_DEFINE_ERROR(NotAdmissibleShift);
ANISO_DEFINE_ERROR(TangencyError);
ANISO_DEFINE_ERROR(OptimizerNotConverged);
ANISO_DEFINE_ERROR(EmptyIntersection);
ANISO_DEFINE_ERROR(ChartFailure);
ANISO_DEFINE_ERROR(ImmersionLost);
ANISO_DEFINE_ERROR(UntaggedEdge);
ANISO_DEFINE_ERROR(OpenSurface);
ANISO_DEFINE_ERROR(BoundaryEscape);
ANISO_DEFINE_ERROR(ComplexEigenvalues);
ANISO_DEFINE_ERROR(WettedRegionUnbounded);
ANISO_DEFINE_ERROR(StepTooLarge);
ANISO_DEFINE_ERROR(CapillaryViolation);
ANISO_DEFINE_ERROR(NotMeanConvex);
ANISO_DEFINE_ERROR(CapillarySignViolation);
ANISO_DEFINE_ERROR(MinimizerOnBoundary);
ANISO_DEFINE_ERROR(FitNotConverged);
ANISO_DEFINE_ERROR(NotConstantCurvature);

#undef ANISO_DEFINE_ERROR

// Configuration/schema problems carry a JSON pointer to the offending field.
struct ConfigError : Error {
    ConfigError(const std::string& msg, std::string pointer_path = "")
        : Error(pointer_path.empty() ? msg : msg + " (at " + pointer_path + ")"),
          pointer(std::move(pointer_path)) {}
    std::string pointer;
};

}  // namespace aniso
