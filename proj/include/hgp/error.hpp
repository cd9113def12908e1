#pragma once

#include <stdexcept>
#include <string>

namespace hgp {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A caller broke an operation's precondition.
class ContractViolation : public Error {
public:
    using Error::Error;
};

/// A file or document could not be read or did not match its schema.
class LoadError : public Error {
public:
    using Error::Error;
};

/// A model or grammar is not well formed.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Synthetic generation could not satisfy its parameters.
class GenerationError : public Error {
public:
    using Error::Error;
};

}  // namespace hgp
