#pragma once

#include <stdexcept>
#include <string>

namespace blowup {

// Invalid or inconsistent input data.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& m) : std::runtime_error(m) {}
};

// The asymptotic regime assumed by the construction is violated
// (coercivity loss, F_k escape, non-contraction, wrong kappa sign, ...).
struct RegimeError : std::runtime_error {
    explicit RegimeError(const std::string& m) : std::runtime_error(m) {}
};

// A numerical procedure failed to converge.
struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& m) : std::runtime_error(m) {}
};

}  // namespace blowup
