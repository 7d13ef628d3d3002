#pragma once

#include <stdexcept>
#include <string>

namespace nsfp {

/// Invalid physical input (negative density, non-positive temperature, ...).
struct DomainError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Invalid algorithmic parameter (non-positive step, bad tolerance, ...).
struct ParameterError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Two objects that must share a grid/basis do not.
struct ContractError : std::logic_error {
    using std::logic_error::logic_error;
};

/// Requested basis/problem size exceeds the configured cap.
struct ResourceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A linear or nonlinear solve failed in a way that cannot be reported as data.
struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Violated precondition on operation input (e.g. nonzero-mean Bogovskii data).
struct PreconditionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Exponent configuration outside the admissible window.
struct AdmissibilityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent run configuration.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace nsfp
