#pragma once

#include <stdexcept>
#include <string>

namespace polykr {

// User-facing configuration problems (bad parameters, malformed files).
class config_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Numerical failures (degenerate inputs, non-convergence).
class numeric_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class io_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Raised when the least-squares resampling loop exhausts its round budget.
// Carries the last observed Gramian deviation for diagnostics.
class fit_error : public numeric_error {
public:
    fit_error(const std::string& msg, double last_gramian_norm, int rounds)
        : numeric_error(msg), last_gramian_norm(last_gramian_norm), rounds(rounds) {}

    double last_gramian_norm;
    int rounds;
};

}  // namespace polykr
