#pragma once

#include <stdexcept>
#include <string>

namespace rks {

// A documented precondition was violated by the caller.
class ContractError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A field or kernel produced a non-finite value during quadrature.
class EvaluationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Inputs are well-formed but carry no information (e.g. all-zero coefficients).
class DegenerateInputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// The requested configuration cannot be realized (lattice too small,
// concentration unattainable, inadmissible decay exponent).
class InfeasibleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace rks
