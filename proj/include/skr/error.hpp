#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace skr {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct UnknownVariable : Error {
    explicit UnknownVariable(const std::string& name)
        : Error("unknown variable '" + name + "'") {}
};

struct DimensionMismatch : Error {
    using Error::Error;
};

struct InvalidArgument : Error {
    using Error::Error;
};

// Raised when a dense table or an enumeration would exceed the entry budget.
struct CapacityError : Error {
    CapacityError(const std::string& what, double requested, std::size_t budget)
        : Error(what + ": " + std::to_string(static_cast<unsigned long long>(requested)) +
                " entries requested, budget is " + std::to_string(budget)),
          requested(requested),
          budget(budget) {}
    double requested;
    std::size_t budget;
};

// Floating-point results that cannot be explained by rounding.
struct ConsistencyError : Error {
    using Error::Error;
};

struct FactorizationError : Error {
    using Error::Error;
};

struct InfeasibleRates : Error {
    using Error::Error;
};

struct ChainViolated : Error {
    ChainViolated(const std::string& chain, double residual)
        : Error("Markov chain " + chain + " violated, residual " + std::to_string(residual) + " bits"),
          residual(residual) {}
    double residual;
};

struct ParseError : Error {
    using Error::Error;
};

}  // namespace skr
