#pragma once

#include <stdexcept>
#include <string>

namespace ladderlab {

// Argument outside the supported range of an operation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// A numerical procedure failed to reach its tolerance (root bracket, derivative
// step check, kernel cache too short, ...).
class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Sign-change scan could not resolve the zero structure of Z in a cell.
class AmbiguityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Interval width outside the range a claim is stated for.
class RegimeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Malformed or mismatched file / config content.
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Table or cache violates one of its structural invariants.
class InvariantError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace ladderlab
