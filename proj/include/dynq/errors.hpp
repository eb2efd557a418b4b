#pragma once

#include <stdexcept>
#include <string>

namespace dynq {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define DYNQ_DEFINE_ERROR(Name)            \
  class Name : public Error {              \
   public:                                 \
    using Error::Error;                    \
  }

// dynamics
DYNQ_DEFINE_ERROR(NonFiniteError);
DYNQ_DEFINE_ERROR(InputOutOfRangeError);
DYNQ_DEFINE_ERROR(UnsupportedRhoError);
// quantization
DYNQ_DEFINE_ERROR(RangeExceededError);
// regions
DYNQ_DEFINE_ERROR(EmptyContractionError);
DYNQ_DEFINE_ERROR(DegenerateRegionError);
DYNQ_DEFINE_ERROR(PrecisionBreachError);
// inputabs
DYNQ_DEFINE_ERROR(EmptyMenuError);
// bisim
DYNQ_DEFINE_ERROR(InputMismatchError);
// planner
DYNQ_DEFINE_ERROR(NoPathError);
DYNQ_DEFINE_ERROR(RelationBreachError);
// io / cli
DYNQ_DEFINE_ERROR(ParseError);
// violated caller-side contract
DYNQ_DEFINE_ERROR(PreconditionError);

#undef DYNQ_DEFINE_ERROR

}  // namespace dynq
