#pragma once

#include <stdexcept>
#include <string>

namespace flowent {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Input document failed to parse or violates its schema.
struct ParseError : Error {
    using Error::Error;
};

/// Requested computation is not available for this flow descriptor.
struct UnsupportedDescriptor : Error {
    using Error::Error;
};

/// Exhaustive enumeration was asked beyond the configured hard caps.
struct CapExceeded : Error {
    using Error::Error;
};

/// An always-on internal self-check failed (a bug, not a user error).
struct InvariantViolation : Error {
    using Error::Error;
};

[[noreturn]] inline void invariant_failure(const std::string& msg) {
    throw InvariantViolation(msg);
}

#define FLOWENT_CHECK(cond, msg)                          \
    do {                                                  \
        if (!(cond)) ::flowent::invariant_failure((msg)); \
    } while (0)

}  // namespace flowent
