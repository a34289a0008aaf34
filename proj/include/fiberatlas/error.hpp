#pragma once

#include <stdexcept>
#include <string>

namespace fiberatlas {

// Every failure raised by the library carries a stable machine-readable code
// next to the human message; the CLI serializes both.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

#define FIBERATLAS_DEFINE_ERROR(Name)                                   \
  class Name : public Error {                                           \
   public:                                                              \
    explicit Name(const std::string& message) : Error(#Name, message) {} \
  };

FIBERATLAS_DEFINE_ERROR(DimensionMismatch)
FIBERATLAS_DEFINE_ERROR(UnknownVariable)
FIBERATLAS_DEFINE_ERROR(ZeroPolynomial)
FIBERATLAS_DEFINE_ERROR(ParseError)
FIBERATLAS_DEFINE_ERROR(InvalidArgument)
FIBERATLAS_DEFINE_ERROR(MaxIterExceeded)
FIBERATLAS_DEFINE_ERROR(SingularStep)
FIBERATLAS_DEFINE_ERROR(FiberEmptyWithinBall)
FIBERATLAS_DEFINE_ERROR(InconclusiveMargin)
FIBERATLAS_DEFINE_ERROR(CandidateSingularityFound)
FIBERATLAS_DEFINE_ERROR(ComplexTooLarge)
FIBERATLAS_DEFINE_ERROR(DegenerateCloud)
FIBERATLAS_DEFINE_ERROR(LoopNotCycle)
FIBERATLAS_DEFINE_ERROR(CutLocusNotACircle)
FIBERATLAS_DEFINE_ERROR(ChainingAmbiguity)

#undef FIBERATLAS_DEFINE_ERROR

}  // namespace fiberatlas
