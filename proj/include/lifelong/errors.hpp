#pragma once

#include <stdexcept>
#include <string>

namespace lifelong {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define LIFELONG_ERROR(Name)                     \
  class Name : public Error {                    \
   public:                                       \
    explicit Name(const std::string& what)       \
        : Error(std::string(#Name ": ") + what) {} \
  };

LIFELONG_ERROR(UsageError)
LIFELONG_ERROR(IllegalTreeError)
LIFELONG_ERROR(OracleMisuseError)
LIFELONG_ERROR(OracleTooLargeError)
LIFELONG_ERROR(RealizabilityError)
LIFELONG_ERROR(InternalConsistencyError)
LIFELONG_ERROR(ModelViolationError)
LIFELONG_ERROR(VarianceUnderflowError)
LIFELONG_ERROR(SparsityViolationError)
LIFELONG_ERROR(GeneratorExhaustedError)
LIFELONG_ERROR(SpecError)
LIFELONG_ERROR(SoundnessViolation)

#undef LIFELONG_ERROR

}  // namespace lifelong
