#pragma once

#include <stdexcept>
#include <string>

namespace fsabr {

// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Parameters are valid but the requested approximation does not apply there
// (e.g. the Laplace route for H > 1/2).
class UnsupportedRegime : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Series, quadrature or factorization failed to reach its tolerance.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed user configuration (params file, CLI flag values).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace fsabr
