#pragma once

#include <stdexcept>
#include <string>

namespace hjdg {

/// A structural hypothesis of the problem class was violated (bad parameters,
/// a field outside the range a diagnostic requires, failed comparison
/// preconditions).  CLI maps this to exit code 2.
struct HypothesisError : std::runtime_error {
    explicit HypothesisError(const std::string& msg) : std::runtime_error(msg) {}
};

/// The time stepper failed: CFL violation or a non-finite value appeared.
/// CLI maps this to exit code 3.
struct SolverError : std::runtime_error {
    explicit SolverError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace hjdg
