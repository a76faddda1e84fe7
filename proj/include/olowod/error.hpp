#pragma once

#include <stdexcept>
#include <string>

namespace olowod {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Caller broke an operation precondition (dimension mismatch, empty input, ...).
struct ContractViolation : Error {
    using Error::Error;
};

// Input is valid by type but numerically unusable (zero norm, zero variance, ...).
struct DegenerateInput : Error {
    using Error::Error;
};

// An operation needing previously learned categories was called before any exist.
struct NoOldKnowledge : Error {
    using Error::Error;
};

struct DuplicateCategory : Error {
    using Error::Error;
};

// The single-pass online training constraint was violated.
struct ProtocolViolation : Error {
    using Error::Error;
};

// Malformed stream or config file; message carries path and line context.
struct ParseError : Error {
    using Error::Error;
};

}  // namespace olowod
