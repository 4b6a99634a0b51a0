#pragma once

#include <stdexcept>
#include <string>

namespace gridsync {

// Base class for all gridsync failures so callers can catch one type.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Malformed input file (bad JSON, unparseable MATPOWER table, ...).
class ParseError : public Error {
public:
    using Error::Error;
};

// Structurally invalid network (dangling bus reference, missing slack, ...).
class ValidationError : public Error {
public:
    using Error::Error;
};

// Numerical failure in a solver (singular Jacobian, zero Kron pivot, ...).
class NumericalError : public Error {
public:
    using Error::Error;
};

// A precondition on operation inputs was violated (dimension mismatch,
// step-size guard, heterogeneous damping where uniformity is required, ...).
class PreconditionError : public Error {
public:
    using Error::Error;
};

}  // namespace gridsync
