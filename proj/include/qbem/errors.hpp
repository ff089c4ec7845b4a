// errors.hpp — exception types mapped to CLI exit codes
#pragma once

#include <stdexcept>

namespace qbem {

// Invalid configuration or input file (exit code 2).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Ill-conditioned solve, non-convergent propagation, NaN (exit code 3).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace qbem
