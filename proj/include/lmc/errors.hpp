#pragma once

#include <stdexcept>
#include <string>

namespace lmc {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed or invalid chain documents (schema, stochasticity, labels, pmin).
struct ParseError : Error {
    using Error::Error;
};

// Violated operation precondition or out-of-range argument.
struct DomainError : Error {
    using Error::Error;
};

// Exact enumeration would exceed the configured node budget.
struct GuardError : Error {
    using Error::Error;
};

}  // namespace lmc
