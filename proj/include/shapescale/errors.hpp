#pragma once

#include <stdexcept>
#include <string>

namespace shapescale {

/// Input violated a documented invariant. The message names the invariant.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Non-positive argument handed to a power-law evaluation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A requested design or budget cannot be realised (grid does not fit below
/// the star center, budget below one forward pass, ...).
class InfeasibleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Every optimizer restart produced a non-finite objective.
class NonConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool ok, const std::string& what) {
    if (!ok) throw ValidationError(what);
}

}  // namespace detail
}  // namespace shapescale
