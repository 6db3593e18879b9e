#pragma once

#include <stdexcept>
#include <string>

namespace torswitch {

/// Base class for numerical failures (CLI exit code 3).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// det U(x) vanished: the pair (u0, u1) is not transversal at some point.
class SingularMatrixError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// The RK4 integrator produced non-finite state.
class IntegrationError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class DiffeoInversionError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// Invalid or incomplete experiment configuration (CLI exit code 2).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace torswitch
