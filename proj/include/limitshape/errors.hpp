#pragma once
#include <stdexcept>
#include <string>

namespace limitshape {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

#define LIMITSHAPE_ERROR(Name)                      \
    struct Name : Error {                           \
        explicit Name(const std::string& m)         \
            : Error(std::string(#Name ": ") + m) {} \
    };

LIMITSHAPE_ERROR(OutOfRange)
LIMITSHAPE_ERROR(TooLarge)
LIMITSHAPE_ERROR(DimensionMismatch)
LIMITSHAPE_ERROR(Inconsistent)
LIMITSHAPE_ERROR(NotTrivalent)
LIMITSHAPE_ERROR(NegativeWeight)
LIMITSHAPE_ERROR(SingularLocus)
LIMITSHAPE_ERROR(NonConvergence)
LIMITSHAPE_ERROR(Unbounded)
LIMITSHAPE_ERROR(DomainBoundary)
LIMITSHAPE_ERROR(BranchCut)
LIMITSHAPE_ERROR(SlopeOutOfDomain)
LIMITSHAPE_ERROR(ShockDetected)
LIMITSHAPE_ERROR(StepFailure)
LIMITSHAPE_ERROR(BranchAmbiguous)
LIMITSHAPE_ERROR(SingularBranch)

#undef LIMITSHAPE_ERROR

}  // namespace limitshape
