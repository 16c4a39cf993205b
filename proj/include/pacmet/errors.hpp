#pragma once

#include <stdexcept>
#include <string>

namespace pacmet {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define PACMET_DEFINE_ERROR(Name)                   \
  class Name : public Error {                       \
   public:                                          \
    explicit Name(const std::string& what)          \
        : Error(std::string(#Name ": ") + what) {}  \
  };

PACMET_DEFINE_ERROR(NonHermitian)
PACMET_DEFINE_ERROR(NotDensityMatrix)
PACMET_DEFINE_ERROR(DomainError)
PACMET_DEFINE_ERROR(DimensionMismatch)
PACMET_DEFINE_ERROR(SupportViolation)
PACMET_DEFINE_ERROR(PeriodMismatch)
PACMET_DEFINE_ERROR(WindowTooCoarse)
PACMET_DEFINE_ERROR(GridMismatch)
PACMET_DEFINE_ERROR(SolverDiverged)
PACMET_DEFINE_ERROR(SizeGuard)
PACMET_DEFINE_ERROR(Unreachable)
PACMET_DEFINE_ERROR(NoValidPair)
PACMET_DEFINE_ERROR(ShiftOverlap)
PACMET_DEFINE_ERROR(KrausIncomplete)
PACMET_DEFINE_ERROR(ZeroDiagonalAcceptance)
PACMET_DEFINE_ERROR(DeltaOutOfRange)
PACMET_DEFINE_ERROR(PositivityViolation)
PACMET_DEFINE_ERROR(Saturated)
PACMET_DEFINE_ERROR(InvalidArgument)
PACMET_DEFINE_ERROR(ConfigError)

#undef PACMET_DEFINE_ERROR

}  // namespace pacmet
