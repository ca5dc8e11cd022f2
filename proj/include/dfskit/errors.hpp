#pragma once

#include <stdexcept>

namespace dfskit {

/// Input that violates a documented precondition: bad indices, mismatched
/// spaces, malformed data. The CLI maps it to exit code 2.
class ValidationError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical guard tripped (dimension limit, failed convergence, loss of
/// positivity). The CLI maps it to exit code 3.
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace dfskit
