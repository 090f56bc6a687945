#pragma once

#include <stdexcept>
#include <string>

namespace coarse {

// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed input files or values (CLI exit code 2).
struct ParseError : Error {
    using Error::Error;
};

// An operation's stated precondition does not hold (CLI exit code 3).
struct PreconditionError : Error {
    using Error::Error;
};

// A size or search budget was exceeded; never silently degraded.
struct BudgetError : Error {
    using Error::Error;
};

// A required external input (e.g. an asdim witness) is missing.
struct ExternalInputError : Error {
    using Error::Error;
};

// A witness provider could not answer the requested schedule.
struct ProviderError : Error {
    using Error::Error;
};

}  // namespace coarse
