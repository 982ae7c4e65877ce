#pragma once

#include <stdexcept>
#include <string>

namespace riskshare {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// No Pareto optimal allocation exists for the agent configuration.
class UnsolvableError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Constraint system (rationality or regulatory) has no feasible point.
class InfeasibleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An integral required by the model diverges.
class DivergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed problem configuration or serialized object.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace riskshare
