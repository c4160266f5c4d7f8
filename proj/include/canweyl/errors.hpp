#pragma once

#include <stdexcept>
#include <string>

namespace canweyl {

// Base class for everything this library throws.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NonPositiveTime : Error { using Error::Error; };
struct ModelDomainError : Error { using Error::Error; };
struct NotLimitPoint : Error { using Error::Error; };
struct NotMonotone : Error { using Error::Error; };
struct QuadratureFailure : Error { using Error::Error; };
struct StepFailure : Error { using Error::Error; };
struct BracketFailure : Error { using Error::Error; };
struct ZeroDiagonalPrimitive : Error { using Error::Error; };
struct NotTraceNormalized : Error { using Error::Error; };
struct RangeError : Error { using Error::Error; };
struct ModeAssumptionViolated : Error { using Error::Error; };
struct IntervalValidation : Error { using Error::Error; };
struct ArcGeometryError : Error { using Error::Error; };
struct NoDegenerateStart : Error { using Error::Error; };

} // namespace canweyl
