#pragma once

#include <stdexcept>
#include <string>

namespace petrosem {

/// Base class for all errors raised by the library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed or out-of-contract user input (dimensions, file schema, ranges).
struct InputError : Error {
    using Error::Error;
};

/// A numerical procedure failed to converge or produced non-finite data.
struct NumericalError : Error {
    using Error::Error;
};

/// A documented accuracy contract between two computation paths was violated.
struct ContractError : Error {
    using Error::Error;
};

}  // namespace petrosem
