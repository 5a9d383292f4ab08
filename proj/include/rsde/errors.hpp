#pragma once

#include <stdexcept>
#include <string>

namespace rsde {

struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Projection asked for a point farther than reach/2 from the domain.
struct OutOfReachError : Error {
    using Error::Error;
};

// Normal-cone query at a point that is not on the boundary.
struct NotOnBoundaryError : Error {
    using Error::Error;
};

// Tangent-cone query at a point outside the closure.
struct OutsideDomainError : Error {
    using Error::Error;
};

// Cone has (near-)opposed normals; the projection target is degenerate.
struct DegenerateConeError : Error {
    using Error::Error;
};

// Path evaluation beyond the sampled horizon.
struct OutOfHorizonError : Error {
    using Error::Error;
};

// Statistic requested over a window holding fewer than two samples.
struct EmptyWindowError : Error {
    using Error::Error;
};

// Window statistics whose normalizer is identically degenerate.
struct DegenerateWindowError : Error {
    using Error::Error;
};

// Fixed-point iteration exhausted its budget.
struct NoConvergenceError : Error {
    NoConvergenceError(const std::string& what, int iters, double res)
        : Error(what), iterations(iters), residual(res) {}
    int iterations;
    double residual;
};

// Ensemble statistic with too few paths to be meaningful.
struct InsufficientSamplesError : Error {
    using Error::Error;
};

// Field evaluation at a point where it is not defined (mirror pair on the diagonal).
struct SingularPointError : Error {
    using Error::Error;
};

// Output file or directory could not be written.
struct IoError : Error {
    using Error::Error;
};

}  // namespace rsde
