#pragma once

#include <stdexcept>
#include <string>

namespace nlslab {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Fields living on different grids were combined.
struct GridMismatchError : Error {
    using Error::Error;
};

// Bad user-facing configuration; message names the violated assumption.
struct ConfigError : Error {
    using Error::Error;
};

// Iterative solver failed to converge.
struct SolverError : Error {
    using Error::Error;
};

// Requested parameter outside its admissible interval.
struct DomainError : Error {
    using Error::Error;
};

// Soliton center too close to the wrap-around seam of the periodic box.
struct PlacementError : Error {
    using Error::Error;
};

// Symplectic frame numerically degenerate (condition number too large).
struct DegeneracyError : Error {
    using Error::Error;
};

// Cutoff geometry would clip a foreign soliton.
struct TruncationGeometryError : Error {
    using Error::Error;
};

// Skew-orthogonal decomposition did not converge (state left the tracked
// neighborhood of the soliton manifold).
struct DecompositionError : Error {
    using Error::Error;
};

// Non-finite field values or runaway amplitude during evolution.
struct BlowUpError : Error {
    using Error::Error;
};

// Particle integrator rejected a step.
struct IntegratorError : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

} // namespace nlslab
