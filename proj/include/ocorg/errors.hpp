#pragma once

#include <stdexcept>
#include <string>

namespace ocorg {

// Base class for everything this library throws. Messages are prefixed with
// "module::operation:" at the throw site so callers can name the failure.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define OCORG_ERROR_TYPE(Name)                                        \
    class Name : public Error {                                       \
    public:                                                           \
        explicit Name(const std::string& msg)                         \
            : Error(std::string(#Name) + ": " + msg) {}               \
    }

// numerics
OCORG_ERROR_TYPE(DimensionMismatch);
OCORG_ERROR_TYPE(SingularMatrix);
OCORG_ERROR_TYPE(NotSchurStable);
OCORG_ERROR_TYPE(NotSymmetric);

// polytope
OCORG_ERROR_TYPE(Infeasible);
OCORG_ERROR_TYPE(Unbounded);
OCORG_ERROR_TYPE(InvalidBeta);
OCORG_ERROR_TYPE(IterationLimit);

// system
OCORG_ERROR_TYPE(NotControllable);
OCORG_ERROR_TYPE(UnstablePoleRequested);
OCORG_ERROR_TYPE(EmptySteadyStateSet);

// mas
OCORG_ERROR_TYPE(LambdaTooSmall);
OCORG_ERROR_TYPE(HorizonExceeded);

// cost
OCORG_ERROR_TYPE(NotStronglyConvex);

// controller / sim
OCORG_ERROR_TYPE(InfeasibleCurrentPoint);
OCORG_ERROR_TYPE(InvalidEpsilon);
OCORG_ERROR_TYPE(InfeasibleInitialization);

// scenario / cli
OCORG_ERROR_TYPE(ConfigError);

#undef OCORG_ERROR_TYPE

} // namespace ocorg
