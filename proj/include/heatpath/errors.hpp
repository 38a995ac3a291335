#pragma once

#include <stdexcept>
#include <string>

namespace heatpath {

// Invalid user-facing configuration; the CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical breakdown (failed factorization, quadrature not converged);
// the CLI maps this to exit code 3.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace heatpath
