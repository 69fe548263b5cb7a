#pragma once

#include <stdexcept>
#include <string>

namespace nonnormal {

// Bad parameters or preconditions supplied by the caller.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Iterations that failed to converge, singular systems, broken invariants.
class NumericalFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& msg)
{
    if (!cond) throw InvalidArgument(msg);
}

} // namespace nonnormal
