#pragma once

#include <stdexcept>
#include <string>

namespace rcla {

// Argument outside the mathematical domain of an operation, or a parameter
// record that violates its invariants.
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// An iterative evaluation hit its iteration cap.
class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Finite-difference solve failed: singular tridiagonal pivot or non-finite values.
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Query outside a tabulated or gridded hull.
class RangeError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

}  // namespace rcla
