#pragma once

#include <stdexcept>
#include <string>

namespace sparsex {

// Base for every error the library raises on purpose.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A precondition on a parameter or on operand dimensions was violated.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

class DimensionError : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

// An exact computation would exceed its enumeration or memory budget.
class ResourceError : public Error {
public:
    using Error::Error;
};

// A randomized construction ran out of attempts.
class ConstructionError : public Error {
public:
    using Error::Error;
};

}  // namespace sparsex
